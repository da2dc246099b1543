"""Small-conductor curves with Cremona conductor and rank, used as independent oracles.

Root numbers follow from rank parity for these curves.
"""

import re

CORPUS = {
    "11a1": ([0, -1, 1, -10, -20], 0),
    "11a3": ([0, -1, 1, 0, 0], 0),
    "15a1": ([1, 1, 1, -10, -10], 0),
    "15a7": ([1, 1, 1, -80, 242], 0),
    "17a4": ([1, -1, 1, -1, 0], 0),
    "19a1": ([0, 1, 1, -9, -15], 0),
    "21a1": ([1, 0, 0, -4, -1], 0),
    "33a1": ([1, 1, 0, -11, 0], 0),
    "35a1": ([0, 1, 1, 9, 1], 0),
    "37a1": ([0, 0, 1, -1, 0], 1),
    "39a1": ([1, 1, 0, -4, -5], 0),
    "43a1": ([0, 1, 1, 0, 0], 1),
    "51a1": ([0, 1, 1, 1, -1], 0),
    "53a1": ([1, -1, 1, 0, 0], 1),
    "57a1": ([0, -1, 1, -2, 2], 1),
    "65a1": ([1, 0, 0, -1, 0], 1),
    "77a1": ([0, 0, 1, 2, 0], 1),
    "79a1": ([1, 1, 1, -2, 0], 1),
    "83a1": ([1, 1, 1, 1, 0], 1),
    "89a1": ([1, 1, 1, -1, 0], 1),
    "91a1": ([0, 0, 1, 1, 0], 1),
}


def conductor_of(label: str) -> int:
    return int(re.match(r"\d+", label).group())
