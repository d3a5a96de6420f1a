"""Published periodic-wave solutions of the coupled Ramani system.

Each row stores the given data as multipliers of 2*pi (``k = k_mult * 2pi``,
``tau_jj = tau_mult * 2pi``), the seed constants ``c0``, and the solved
values rounded to four decimals as printed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .residual import GivenParams, UnknownVector

TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class PublishedRow:
    table: int
    row: int
    v0: float
    k_mult: tuple[float, ...]
    tau_mult: tuple[float, ...]
    c0: tuple[float, float]
    omega: tuple[float, ...]
    l: tuple[float, ...]
    tau_off: tuple[float, ...]
    c: tuple[float, float]

    @property
    def label(self) -> str:
        return f"table{self.table}-row{self.row}"

    @property
    def n(self) -> int:
        return len(self.k_mult)

    def given(self, u0: float = 0.0) -> GivenParams:
        return GivenParams(np.array(self.k_mult) * TWO_PI, np.array(self.tau_mult) * TWO_PI, self.v0, u0)

    def solution(self) -> UnknownVector:
        return UnknownVector(self.omega, self.l, self.tau_off, *self.c)

    @property
    def l_zero_branch(self) -> bool:
        return all(v == 0 for v in self.l)


_K1 = (0.1,)
_K2 = (0.1, 0.2)
_K3 = (0.1, 0.2, 0.3)

PUBLISHED = (
    # N = 1, v0 = 0
    PublishedRow(1, 1, 0, _K1, (0.46,), (1, 1), (0.1424,), (0.0921,), (), (0.8494, 0.0419)),
    PublishedRow(1, 2, 0, _K1, (1.86,), (1, 1), (-0.0423,), (0.0,), (), (0.00005, 0.0)),
    # N = 1, v0 = 1
    PublishedRow(2, 1, 1, _K1, (0.46,), (1, 1), (1.3800,), (1.9139,), (), (3.6650, 0.8708)),
    PublishedRow(2, 2, 1, _K1, (1.86,), (1, 1), (1.4071,), (1.4312,), (), (0.0004, 0.0001)),
    # N = 2, v0 = 0
    PublishedRow(3, 1, 0, _K2, (0.96, 1.23), (1, 1), (0.3556, -1.9620), (0.0313, 3.0793), (0.9060,),
                 (0.0460, 0.0651)),
    PublishedRow(3, 2, 0, _K2, (0.46, 1.03), (1, 1), (0.3724, -1.8403), (0.2439, 2.9825), (1.0610,),
                 (1.4268, 0.3234)),
    PublishedRow(3, 3, 0, _K2, (0.52, 1.13), (1, -1), (-0.2612, -0.8778), (0.0, 0.0), (-0.5938,),
                 (0.3925, 0.0)),
    # N = 2, v0 = 1
    PublishedRow(4, 1, 1, _K2, (0.96, 1.23), (1, 1), (1.4078, 3.3761), (1.4515, 1.7779), (2.2216,),
                 (0.6755, 0.0575)),
    PublishedRow(4, 2, 1, _K2, (0.46, 1.03), (1, 1), (1.3897, 3.3863), (1.9282, 1.9582), (1.9332,),
                 (5.1707, 0.9571)),
    PublishedRow(4, 3, 1, _K2, (0.52, 1.13), (1, -1), (1.3843, 3.3920), (1.7341, 1.8698), (2.0174,),
                 (3.1582, 0.5405)),
    # N = 3, v0 = 0
    PublishedRow(5, 1, 0, _K3, (0.67, 0.86, 1.02), (1, 1), (0.4685, -0.8643, 7.0815),
                 (-0.9501, 1.0718, 0.0183), (-1.4992, 1.0605, 1.6167), (24.5355, 0.1485)),
    PublishedRow(5, 2, 0, _K3, (0.46, 1.02, 1.53), (-1, 1), (0.1981, 2.1281, -2.8105),
                 (0.0942, 0.0220, -0.1015), (1.5832, -1.1454, 1.2599), (3.2383, 0.0428)),
    PublishedRow(5, 3, 0, _K3, (0.53, 0.75, 1.13), (1, 1), (0.8089, -1.0065, -0.1976),
                 (0.0, 0.0, 0.0), (-1.5390, 1.7911, 3.1734), (36.8174, 0.0)),
    PublishedRow(5, 4, 0, _K3, (0.53, 0.75, 1.13), (-1, 1), (0.5147, 1.6120, -2.7811),
                 (-0.7670, -0.1002, 0.8148), (1.7865, -1.6037, 1.2270), (23.1536, -0.1155)),
    # N = 3, v0 = 1
    PublishedRow(6, 1, 1, _K3, (0.67, 0.86, 1.02), (1, 1), (1.4388, 3.1394, 7.9404),
                 (1.6866, 2.0555, 1.5475), (2.1251, 1.2939, 2.7630), (24.0624, 0.9121)),
    PublishedRow(6, 2, 1, _K3, (0.46, 1.02, 1.53), (-1, 1), (1.3915, 3.3788, 8.3344),
                 (1.9342, 1.9653, 1.5315), (1.9341, 1.2573, 2.8808), (6.0244, 0.9791)),
    PublishedRow(6, 3, 1, _K3, (0.53, 0.75, 1.13), (-1, 1), (1.3608, 2.4234, -3.9766),
                 (1.7988, 2.3352, 1.0781), (2.0257, -1.9751, 0.6098), (44.3977, 2.6950)),
)


def published(table: int, row: int) -> PublishedRow:
    for r in PUBLISHED:
        if r.table == table and r.row == row:
            return r
    raise KeyError(f"no published row {row} in table {table}")


def published_table(table: int) -> list[PublishedRow]:
    return [r for r in PUBLISHED if r.table == table]
