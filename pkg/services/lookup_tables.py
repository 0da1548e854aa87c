"""
Lookup functions over a parsed program, precomputed into tables.

Every query after construction is a dict lookup; the interpreter asks for
layout offsets on each pooled field access.
"""
from __future__ import annotations

import logging
from typing import Dict, List, Optional, Tuple

from models import ClassDecl, ClassType, LayoutDecl, MethodDecl, PoolBound, Pos, Program
from schemas import StaticError

logger = logging.getLogger(__name__)


class ProgramIndex:
    """Class, layout, field-order and offset tables for one Program.

    Immutable after construction. Duplicate top-level names keep the first
    declaration; wf_program reports the duplicates (E101).
    """

    def __init__(self, program: Program):
        self.program = program
        self.classes: Dict[str, ClassDecl] = {}
        self.layouts: Dict[str, LayoutDecl] = {}
        self._fields: Dict[str, Tuple[str, ...]] = {}
        self._field_types: Dict[str, Dict[str, ClassType]] = {}
        self._class_offsets: Dict[str, Dict[str, int]] = {}
        self._params: Dict[str, Tuple[str, ...]] = {}
        self._bounds: Dict[str, Dict[str, PoolBound]] = {}
        self._methods: Dict[str, Dict[str, MethodDecl]] = {}
        self._layout_offsets: Dict[str, Dict[str, Tuple[int, int]]] = {}

        for cd in program.classes:
            if cd.name in self.classes:
                continue
            self.classes[cd.name] = cd
            self._params[cd.name] = tuple(p.name for p in cd.pool_params)
            self._bounds[cd.name] = {}
            for p in cd.pool_params:
                self._bounds[cd.name].setdefault(p.name, p.bound)
            self._fields[cd.name] = tuple(f.name for f in cd.fields)
            self._field_types[cd.name] = {}
            self._class_offsets[cd.name] = {}
            for i, f in enumerate(cd.fields):
                self._field_types[cd.name].setdefault(f.name, f.type)
                self._class_offsets[cd.name].setdefault(f.name, i)
            self._methods[cd.name] = {}
            for md in cd.methods:
                self._methods[cd.name].setdefault(md.name, md)

        for ld in program.layouts:
            if ld.name in self.layouts:
                continue
            self.layouts[ld.name] = ld
            offsets: Dict[str, Tuple[int, int]] = {}
            for i, cluster in enumerate(ld.clusters):
                for j, f in enumerate(cluster):
                    offsets.setdefault(f, (i, j))
            self._layout_offsets[ld.name] = offsets

        logger.debug(f"indexed {len(self.classes)} class(es), {len(self.layouts)} layout(s)")

    @staticmethod
    def _unknown(message: str, pos: Optional[Pos]) -> StaticError:
        return StaticError.of("E100", message, pos)

    # C(C)
    def class_of(self, name: str, pos: Optional[Pos] = None) -> ClassDecl:
        try:
            return self.classes[name]
        except KeyError:
            raise self._unknown(f"unknown class '{name}'", pos) from None

    # Ps(C)
    def pool_params_of(self, name: str, pos: Optional[Pos] = None) -> Tuple[str, ...]:
        self.class_of(name, pos)
        return self._params[name]

    # P(C, y)
    def bound_of(self, name: str, param: str, pos: Optional[Pos] = None) -> PoolBound:
        self.class_of(name, pos)
        try:
            return self._bounds[name][param]
        except KeyError:
            raise self._unknown(f"class '{name}' has no pool parameter '{param}'", pos) from None

    # M(C, m)
    def method_of(self, name: str, method: str, pos: Optional[Pos] = None) -> MethodDecl:
        self.class_of(name, pos)
        try:
            return self._methods[name][method]
        except KeyError:
            raise self._unknown(f"class '{name}' has no method '{method}'", pos) from None

    def has_method(self, name: str, method: str) -> bool:
        return method in self._methods.get(name, {})

    # F(C, f)
    def field_type_of(self, name: str, field: str, pos: Optional[Pos] = None) -> ClassType:
        self.class_of(name, pos)
        try:
            return self._field_types[name][field]
        except KeyError:
            raise self._unknown(f"class '{name}' has no field '{field}'", pos) from None

    # Fs(C)
    def fields_of(self, name: str, pos: Optional[Pos] = None) -> Tuple[str, ...]:
        self.class_of(name, pos)
        return self._fields[name]

    # L(L)
    def layout_of(self, name: str, pos: Optional[Pos] = None) -> Tuple[str, Tuple[Tuple[str, ...], ...]]:
        try:
            ld = self.layouts[name]
        except KeyError:
            raise self._unknown(f"unknown layout '{name}'", pos) from None
        return ld.class_name, ld.clusters

    def layout_class(self, name: str, pos: Optional[Pos] = None) -> str:
        return self.layout_of(name, pos)[0]

    def cluster_widths(self, name: str) -> List[int]:
        return [len(c) for c in self.layout_of(name)[1]]

    # W(C, f)
    def field_offset_class(self, name: str, field: str, pos: Optional[Pos] = None) -> int:
        self.class_of(name, pos)
        try:
            return self._class_offsets[name][field]
        except KeyError:
            raise self._unknown(f"class '{name}' has no field '{field}'", pos) from None

    # W(L, f)
    def field_offset_layout(self, name: str, field: str, pos: Optional[Pos] = None) -> Tuple[int, int]:
        self.layout_of(name, pos)
        try:
            return self._layout_offsets[name][field]
        except KeyError:
            raise self._unknown(f"layout '{name}' has no field '{field}'", pos) from None
