#!/usr/bin/env python3
"""Stand-in for a floating-point core generator.

usage: mock_fpcore OP M E [TARGET_FREQ_MHZ]

Prints `depth = <n>` and writes <module>.v into $GEN_WORKDIR (or the cwd).
depth = base(OP) + ceil((E + M) / 10) + freq // 200, which grows with the
target frequency. Module names follow FPE<E>_<M> style prefixes.
"""
import os
import sys

BASE = {"FPExp": 1, "FPAdd": 1, "FPSub": 1, "FPMult": 2}
PREFIX = {"FPExp": "FPE", "FPAdd": "FPA", "FPSub": "FPS", "FPMult": "FPM"}


def main(argv):
    if len(argv) not in (3, 4) or argv[0] not in BASE:
        print("usage: mock_fpcore {%s} M E [freq]" % ",".join(sorted(BASE)), file=sys.stderr)
        return 1
    try:
        m, e = int(argv[1]), int(argv[2])
        freq = int(argv[3]) if len(argv) == 4 else 0
    except ValueError:
        print("mock_fpcore: parameters must be naturals", file=sys.stderr)
        return 1
    if m < 0 or e < 0 or freq < 0:
        print("mock_fpcore: parameters must be naturals", file=sys.stderr)
        return 1
    op = argv[0]
    depth = BASE[op] + -(-(e + m) // 10) + freq // 200
    name = "%s%d_%d" % (PREFIX[op], e, m)
    width = e + m + 3
    workdir = os.environ.get("GEN_WORKDIR", ".")
    with open(os.path.join(workdir, name + ".v"), "w") as f:
        f.write("// generated by mock_fpcore %s\n" % " ".join(argv))
        f.write("module %s(\n  input clk,\n" % name)
        f.write("  input [%d:0] X,\n  input [%d:0] Y,\n" % (width - 1, width - 1))
        f.write("  output [%d:0] R\n);\nendmodule\n" % (width - 1))
    print("Pipeline depth = %d" % depth)
    print("depth = %d" % depth)
    return 0


if __name__ == "__main__":
    sys.exit(main(sys.argv[1:]))
