#!/usr/bin/env python3
"""Build tests/fixtures/ricefarms.csv from the plm RiceFarms panel.

The data ship inside the `rdatasets` wheel; the wheel is downloaded with pip
and read in place, nothing is installed.
"""

import argparse
import io
import lzma
import pathlib
import subprocess
import sys
import tempfile
import zipfile

import numpy as np
import pandas as pd

MEMBER = "rdatasets/_data/plm/RiceFarms.pkl.compress"


def load_frame(wheel: pathlib.Path | None) -> pd.DataFrame:
    if wheel is None:
        tmp = pathlib.Path(tempfile.mkdtemp())
        subprocess.run(
            [sys.executable, "-m", "pip", "download", "--no-deps", "-q", "-d", str(tmp), "rdatasets"],
            check=True,
        )
        wheel = next(tmp.glob("rdatasets-*.whl"))
    with zipfile.ZipFile(wheel) as zf:
        name = next((n for n in zf.namelist() if "/plm/RiceFarms.pkl" in n), MEMBER)
        raw = lzma.decompress(zf.read(name))
    return pd.read_pickle(io.BytesIO(raw))


def main() -> int:
    root = pathlib.Path(__file__).resolve().parent.parent
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--wheel", type=pathlib.Path, help="use an already downloaded rdatasets wheel")
    ap.add_argument("--out", type=pathlib.Path, default=root / "tests" / "fixtures" / "ricefarms.csv")
    args = ap.parse_args()

    df = load_frame(args.wheel)
    df["t"] = df.groupby("id").cumcount() + 1
    out = pd.DataFrame(
        {
            "id": df["id"],
            "t": df["t"],
            "y": np.log(df["goutput"]),
            "log_seed": np.log(df["seed"]),
            "log_totlabor": np.log(df["totlabor"]),
            "log_size": np.log(df["size"]),
        }
    )
    args.out.parent.mkdir(parents=True, exist_ok=True)
    out.to_csv(args.out, index=False)
    print(f"wrote {args.out} ({out['id'].nunique()} individuals x {out['t'].max()} periods)")
    return 0


if __name__ == "__main__":
    sys.exit(main())
