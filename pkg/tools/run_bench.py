"""
Run the traversal benchmark over several list lengths.
Usage: python tools/run_bench.py [N ...]
"""
import sys
import os

sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from config import DEFAULT_BENCH_N
from services.bench import bench_traversal


def run(sizes):
    """Print the two timing lines for each size"""
    for n in sizes:
        for line in bench_traversal(n).lines():
            print(line)


if __name__ == "__main__":
    sizes = [int(a) for a in sys.argv[1:]] or [1000, 10000, DEFAULT_BENCH_N]
    run(sizes)
