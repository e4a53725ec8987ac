"""Generator for a small, separable benchmark corpus.

Inconsistent records replace the keyword the comment talks about (so the
Replace span contradicts the comment); consistent records edit an unrelated
filler token and leave the keyword alone.
"""

from __future__ import annotations

import numpy as np

from .dataset import COMMENT_TYPES, CciRecord

KEYWORDS = [
    "alpha", "beta", "gamma", "delta", "epsilon", "zeta", "eta", "theta",
    "iota", "kappa", "lambda0", "mu", "nu", "xi", "omicron", "pi0",
    "rho", "sigma", "tau0", "omega",
]
FILLERS = ["compute", "fetch", "resolve", "lookup", "build", "merge", "scan", "probe"]


def make_record(i: int, rng: np.random.Generator) -> CciRecord:
    kw = KEYWORDS[rng.integers(len(KEYWORDS))]
    f1 = FILLERS[rng.integers(len(FILLERS))]
    f2 = FILLERS[rng.integers(len(FILLERS))]
    old_code = f"int {kw} = {f1} ( {f2} , {kw} ) ;"
    comment = f"/** Returns the {kw} value. */"
    label = i % 2
    if label == 0:
        # Consistent: swap a filler for another filler, keyword untouched.
        replacement = f1
        while replacement == f1:
            replacement = FILLERS[rng.integers(len(FILLERS))]
        new_code = f"int {kw} = {replacement} ( {f2} , {kw} ) ;"
    else:
        kw2 = kw
        while kw2 == kw:
            kw2 = KEYWORDS[rng.integers(len(KEYWORDS))]
        new_code = f"int {kw2} = {f1} ( {f2} , {kw2} ) ;"
    return CciRecord(
        id=f"toy-{i}",
        comment_type=COMMENT_TYPES[i % len(COMMENT_TYPES)],
        comment=comment,
        old_code=old_code,
        new_code=new_code,
        label=label,
    )


def make_toy_corpus(
    n_train: int = 400, n_valid: int = 100, seed: int = 0
) -> tuple[list[CciRecord], list[CciRecord]]:
    rng = np.random.default_rng(seed)
    train = [make_record(i, rng) for i in range(n_train)]
    valid = [make_record(n_train + i, rng) for i in range(n_valid)]
    return train, valid
