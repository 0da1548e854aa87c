"""
Run-time entities: values, object cells, pool cells, the heap and frames.

Object and pool addresses are dense integers in two separate namespaces,
assigned in allocation order, so replaying the same operations always
yields the same addresses and the same dump.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Dict, Iterator, List, Optional, Sequence, Tuple, Union

from models import NONE, PoolArg
from schemas import InternalStuck
from services.lookup_tables import ProgramIndex

logger = logging.getLogger(__name__)


class _Null:
    """The null value"""

    _instance: Optional["_Null"] = None

    def __new__(cls) -> "_Null":
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "NULL"


class _NonePool:
    """The `none` pool address. Never a key of the heap."""

    _instance: Optional["_NonePool"] = None

    def __new__(cls) -> "_NonePool":
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "NONE_POOL"


NULL = _Null()
NONE_POOL = _NonePool()


@dataclass(frozen=True)
class ObjectAddr:
    id: int


@dataclass(frozen=True)
class PoolAddr:
    id: int


@dataclass(frozen=True)
class Location:
    pool: PoolAddr
    index: int

    def __post_init__(self) -> None:
        if self.index < 0:
            raise InternalStuck(f"negative pool index {self.index}")


Value = Union[_Null, ObjectAddr, Location]
PoolRef = Union[_NonePool, PoolAddr]
Address = Union[ObjectAddr, PoolAddr, Location]


@dataclass
class ObjectCell:
    class_name: str
    ghost: Tuple[PoolRef, ...]
    record: List[Value]


@dataclass
class PoolCell:
    layout_name: str
    ghost: Tuple[PoolRef, ...]
    clusters: List[List[List[Value]]] = field(default_factory=list)

    @property
    def size(self) -> int:
        return len(self.clusters[0]) if self.clusters else 0


def render_value(v: Union[Value, PoolRef]) -> str:
    if v is NULL:
        return "null"
    if v is NONE_POOL:
        return "none"
    if isinstance(v, ObjectAddr):
        return f"obj@{v.id}"
    if isinstance(v, PoolAddr):
        return f"pool@{v.id}"
    if isinstance(v, Location):
        return f"({render_value(v.pool)}, {v.index})"
    raise TypeError(f"not a run-time value: {v!r}")


def _render_ghost(ghost: Sequence[PoolRef]) -> str:
    return "<" + ", ".join(render_value(p) for p in ghost) + ">"


class Heap:
    """Object cells and pool cells, growing monotonically.

    Cells are mutated in place; nothing is ever removed. A pool address is
    first reserved (slot holds None) and then materialised by alloc_pool,
    which is what lets two pools name each other in their ghost params.
    """

    def __init__(self, index: ProgramIndex):
        self.index = index
        self.objects: List[ObjectCell] = []
        self.pools: List[Optional[PoolCell]] = []

    def __len__(self) -> int:
        return len(self.objects) + len(self.pools)

    # ---- allocation ----

    def alloc_object(self, class_name: str, pool_params: Sequence[PoolRef]) -> ObjectAddr:
        if not pool_params or pool_params[0] is not NONE_POOL:
            raise InternalStuck(f"unpooled {class_name} must live in none, got {list(pool_params)!r}")
        width = len(self.index.fields_of(class_name))
        self.objects.append(ObjectCell(class_name, tuple(pool_params), [NULL] * width))
        addr = ObjectAddr(len(self.objects) - 1)
        logger.debug(f"alloc_object {class_name} -> obj@{addr.id}")
        return addr

    def reserve_pool(self) -> PoolAddr:
        self.pools.append(None)
        return PoolAddr(len(self.pools) - 1)

    def alloc_pool(self, layout_name: str, pool_params: Sequence[PoolRef], self_addr: PoolAddr) -> None:
        if not pool_params or pool_params[0] != self_addr:
            raise InternalStuck(f"pool@{self_addr.id} must be its own first pool parameter")
        if not 0 <= self_addr.id < len(self.pools) or self.pools[self_addr.id] is not None:
            raise InternalStuck(f"pool@{self_addr.id} was not reserved")
        n_clusters = len(self.index.layout_of(layout_name)[1])
        self.pools[self_addr.id] = PoolCell(
            layout_name, tuple(pool_params), [[] for _ in range(n_clusters)]
        )
        logger.debug(f"alloc_pool {layout_name} at pool@{self_addr.id}")

    def pool_append(self, addr: PoolAddr) -> int:
        cell = self.pool_cell(addr)
        index = cell.size
        for cluster, width in zip(cell.clusters, self.index.cluster_widths(cell.layout_name)):
            cluster.append([NULL] * width)
        return index

    # ---- cell access ----

    def object_cell(self, addr: ObjectAddr) -> ObjectCell:
        if not 0 <= addr.id < len(self.objects):
            raise InternalStuck(f"dangling object address obj@{addr.id}")
        return self.objects[addr.id]

    def pool_cell(self, addr: PoolAddr) -> PoolCell:
        cell = self.pools[addr.id] if 0 <= addr.id < len(self.pools) else None
        if cell is None:
            raise InternalStuck(f"no pool at pool@{addr.id}")
        return cell

    def has_pool(self, addr: PoolAddr) -> bool:
        return 0 <= addr.id < len(self.pools) and self.pools[addr.id] is not None

    def has_object(self, addr: ObjectAddr) -> bool:
        return 0 <= addr.id < len(self.objects)

    def read_field(self, addr: ObjectAddr, i: int) -> Value:
        record = self.object_cell(addr).record
        if not 0 <= i < len(record):
            raise InternalStuck(f"field offset {i} out of range for obj@{addr.id}")
        return record[i]

    def write_field(self, addr: ObjectAddr, i: int, v: Value) -> None:
        record = self.object_cell(addr).record
        if not 0 <= i < len(record):
            raise InternalStuck(f"field offset {i} out of range for obj@{addr.id}")
        record[i] = v

    def _record(self, addr: PoolAddr, n: int, i: int, j: int) -> List[Value]:
        clusters = self.pool_cell(addr).clusters
        if not 0 <= i < len(clusters):
            raise InternalStuck(f"cluster {i} out of range for pool@{addr.id}")
        if not 0 <= n < len(clusters[i]):
            raise InternalStuck(f"index {n} out of range for pool@{addr.id}")
        record = clusters[i][n]
        if not 0 <= j < len(record):
            raise InternalStuck(f"slot {j} out of range in cluster {i} of pool@{addr.id}")
        return record

    def read_slot(self, addr: PoolAddr, n: int, i: int, j: int) -> Value:
        return self._record(addr, n, i, j)[j]

    def write_slot(self, addr: PoolAddr, n: int, i: int, j: int, v: Value) -> None:
        self._record(addr, n, i, j)[j] = v

    # ---- uniform field access ----

    def class_of_value(self, v: Value) -> str:
        if isinstance(v, ObjectAddr):
            return self.object_cell(v).class_name
        if isinstance(v, Location):
            return self.index.layout_class(self.pool_cell(v.pool).layout_name)
        raise InternalStuck(f"{render_value(v)} has no class")

    def load(self, v: Value, field_name: str) -> Value:
        """Read `field_name` of an object, whichever way it is stored."""
        if isinstance(v, ObjectAddr):
            cell = self.object_cell(v)
            return self.read_field(v, self.index.field_offset_class(cell.class_name, field_name))
        if isinstance(v, Location):
            cell = self.pool_cell(v.pool)
            i, j = self.index.field_offset_layout(cell.layout_name, field_name)
            return self.read_slot(v.pool, v.index, i, j)
        raise InternalStuck(f"cannot read '{field_name}' of {render_value(v)}")

    def store(self, v: Value, field_name: str, new: Value) -> None:
        if isinstance(v, ObjectAddr):
            cell = self.object_cell(v)
            self.write_field(v, self.index.field_offset_class(cell.class_name, field_name), new)
        elif isinstance(v, Location):
            cell = self.pool_cell(v.pool)
            i, j = self.index.field_offset_layout(cell.layout_name, field_name)
            self.write_slot(v.pool, v.index, i, j, new)
        else:
            raise InternalStuck(f"cannot write '{field_name}' of {render_value(v)}")

    def this_of(self, v: Value) -> Tuple[str, Tuple[PoolRef, ...], Value]:
        """getThis: class, ghost pool params and the receiver value itself."""
        if isinstance(v, ObjectAddr):
            cell = self.object_cell(v)
            return cell.class_name, cell.ghost, v
        if isinstance(v, Location):
            pool = self.pool_cell(v.pool)
            if v.index >= pool.size:
                raise InternalStuck(f"index {v.index} out of range for pool@{v.pool.id}")
            return self.index.layout_class(pool.layout_name), pool.ghost, v
        raise InternalStuck(f"no receiver in {render_value(v)}")

    # ---- dump ----

    def iter_objects(self) -> Iterator[Tuple[ObjectAddr, ObjectCell]]:
        for k, cell in enumerate(self.objects):
            yield ObjectAddr(k), cell

    def iter_pools(self) -> Iterator[Tuple[PoolAddr, PoolCell]]:
        for k, cell in enumerate(self.pools):
            if cell is not None:
                yield PoolAddr(k), cell

    def dump_lines(self) -> List[str]:
        lines = []
        for addr, obj in self.iter_objects():
            names = self.index.fields_of(obj.class_name)
            body = ", ".join(f"{f} = {render_value(v)}" for f, v in zip(names, obj.record))
            lines.append(
                f"obj@{addr.id} : {obj.class_name}{_render_ghost(obj.ghost)} "
                + (f"{{ {body} }}" if body else "{}")
            )
        for k, cell in enumerate(self.pools):
            if cell is None:
                lines.append(f"pool@{k} : <reserved>")
                continue
            _, clusters = self.index.layout_of(cell.layout_name)
            shape = ",".join("[" + ", ".join(c) + "]" for c in clusters)
            line = f"pool@{k} : {cell.layout_name}{_render_ghost(cell.ghost)} size={cell.size} clusters=[{shape}]"
            for n in range(cell.size):
                recs = "".join(
                    "(" + ", ".join(render_value(v) for v in cluster[n]) + ")"
                    for cluster in cell.clusters
                )
                line += f" | record {n}: {recs}"
            lines.append(line)
        return lines

    def dump(self) -> str:
        return "\n".join(self.dump_lines())


class Frame:
    """Variable bindings of one activation. `none` always maps to NONE_POOL."""

    def __init__(self, bindings: Optional[Dict[str, Union[Value, PoolRef]]] = None):
        self._vars: Dict[str, Union[Value, PoolRef]] = dict(bindings or {})

    def __contains__(self, name: str) -> bool:
        return name in self._vars

    def __getitem__(self, name: str) -> Union[Value, PoolRef]:
        try:
            return self._vars[name]
        except KeyError:
            raise InternalStuck(f"unbound variable '{name}'") from None

    def __setitem__(self, name: str, v: Union[Value, PoolRef]) -> None:
        self._vars[name] = v

    def names(self) -> List[str]:
        return list(self._vars)

    def items(self):
        return self._vars.items()

    def pool(self, y: PoolArg) -> PoolRef:
        if y is NONE:
            return NONE_POOL
        v = self[y]
        if v is not NONE_POOL and not isinstance(v, PoolAddr):
            raise InternalStuck(f"'{y}' is not bound to a pool")
        return v

    def value(self, x: str) -> Value:
        v = self[x]
        if v is NONE_POOL or isinstance(v, PoolAddr):
            raise InternalStuck(f"'{x}' is bound to a pool, not a value")
        return v

    def copy(self) -> "Frame":
        return Frame(self._vars)

    def __repr__(self) -> str:
        inner = ", ".join(f"{k} -> {render_value(v)}" for k, v in self._vars.items())
        return f"Frame({inner})"
