#!/usr/bin/env python3
"""Stand-in for a pipelining generator.

usage: mock_pipeline OP W

Prints `latency = <n>` with n = ceil(W / 16) + 1 and writes <OP>_<W>.v
into $GEN_WORKDIR (or the cwd).
"""
import os
import sys


def main(argv):
    if len(argv) != 2 or not argv[1].isdigit():
        print("usage: mock_pipeline OP W", file=sys.stderr)
        return 1
    op, w = argv[0], int(argv[1])
    latency = -(-w // 16) + 1
    name = "%s_%d" % (op, w)
    workdir = os.environ.get("GEN_WORKDIR", ".")
    with open(os.path.join(workdir, name + ".v"), "w") as f:
        f.write("module %s(input clk, input [%d:0] l, input [%d:0] r, output [%d:0] out);\n"
                "endmodule\n" % (name, w - 1, w - 1, w - 1))
    print("latency = %d" % latency)
    return 0


if __name__ == "__main__":
    sys.exit(main(sys.argv[1:]))
