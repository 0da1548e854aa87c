"""
Print a program with every layout rewritten to AoS or SoA form.
Usage: python tools/relayout.py FILE {declared,aos,soa}
"""
import sys
import os

sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from models import pretty_program
from services.corpus_service import LAYOUT_MODES, relayout
from services.parser import parse_program


def main(argv):
    if len(argv) != 2 or argv[1] not in LAYOUT_MODES:
        print(__doc__.strip(), file=sys.stderr)
        return 2
    path, mode = argv
    with open(path, encoding="utf-8") as fh:
        parsed = parse_program(fh.read())
    if isinstance(parsed, list):
        for d in parsed:
            print(d.with_file(path).render(), file=sys.stderr)
        return 1
    sys.stdout.write(pretty_program(relayout(parsed, mode)))
    return 0


if __name__ == "__main__":
    sys.exit(main(sys.argv[1:]))
