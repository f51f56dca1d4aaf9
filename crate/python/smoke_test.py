#!/usr/bin/env python3
"""Smoke test for the loopsynth_py extension module.

Builds nothing itself: run `cargo build --release -p loopsynth-py` first,
then `python3 python/smoke_test.py`. The script copies the built cdylib next
to a temp directory under the import name `loopsynth_py.so` and exercises
the main entry points.
"""

import os
import shutil
import sys
import tempfile

REPO = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))


def load_module():
    candidates = [
        os.path.join(REPO, "target", "release", "libloopsynth_py.so"),
        os.path.join(REPO, "target", "debug", "libloopsynth_py.so"),
    ]
    built = next((p for p in candidates if os.path.exists(p)), None)
    if built is None:
        sys.exit("build the extension first: cargo build --release -p loopsynth-py")
    stage = tempfile.mkdtemp(prefix="loopsynth-py-")
    shutil.copy(built, os.path.join(stage, "loopsynth_py.so"))
    sys.path.insert(0, stage)
    import loopsynth_py

    return loopsynth_py


def check(name, condition, detail=""):
    status = "ok" if condition else "FAIL"
    print(f"  [{status}] {name}{': ' + str(detail) if detail else ''}")
    if not condition:
        sys.exit(1)


def main():
    ls = load_module()
    print(f"loaded loopsynth_py {ls.__version__}")

    benchmarks = ls.list_benchmarks()
    check("benchmark catalog", "fast-sort" in benchmarks and len(benchmarks) == 21,
          f"{len(benchmarks)} benchmarks")
    check("profiles", "x86-mem" in ls.list_profiles())

    # program text round trip via the noop counter
    text = ls.random_program("x86-mem", seed=7)
    check("random program parses", ls.count_noops(text) >= 0)

    # the built-in comb sort fixture sorts a concrete array
    comb = ls.fixture_program("comb-sort")
    result = ls.run_x86(comb, arrays=[[5, 3, 1, 4, 2]], bound=40)
    check("comb sort fixture sorts", result["memory"] == [1, 2, 3, 4, 5], result["halt"])

    # and fully solves a generated fast-sort training split
    problems = ls.generate_problems("fast-sort", split="train", count=40, seed=3)
    verdict = ls.score_against(comb, problems)
    check("comb sort solves training split", verdict["fully_correct"],
          f"{verdict['raw']}/{verdict['max']}")

    # the image-machine reference fill paints the solid target
    fill = ls.fixture_program("pattern1-fill")
    image = ls.run_image(fill, benchmark="image-pattern-1")
    check("pattern fill solves target", image["solved"],
          f"{image['cycles_used']} cycles, size {image['size']}")

    # a short synthesis run on an easy benchmark returns a sane record
    record = ls.synthesize("fourth-power", seed=1, period=20000, max_periods=4,
                           train_count=200, test_count=300)
    check("synthesize returns a record", record["evaluations"] > 0,
          f"success={record['train_success']} score={record['final_score']}")
    if record["train_success"]:
        check("success carries a program", record["simplest_program"] is not None,
              f"generalizes={record['generalizes']}")

    print("smoke test passed")


if __name__ == "__main__":
    main()
