"""Parameter sets: the original FrodoKEM rows and the two modified families."""
from dataclasses import dataclass

NBAR = 8


@dataclass(frozen=True)
class ParamSet:
    name: str
    n: int
    q: int
    sigma: float
    ell: int
    nbar: int = NBAR

    def __post_init__(self):
        if self.nbar != NBAR:
            raise ValueError("only nbar = 8 is supported")
        if self.n <= 0 or self.n % 8:
            raise ValueError(f"n must be a positive multiple of 8, got {self.n}")
        if self.q < 4 or self.q & (self.q - 1):
            raise ValueError(f"q must be a power of two, got {self.q}")
        if self.ell not in (128, 192, 256):
            raise ValueError(f"ell must be 128, 192 or 256, got {self.ell}")
        if self.sigma < 0:
            raise ValueError("sigma must be nonnegative")
        if self.beta < 2 or self.beta % 2:
            raise ValueError(f"q={self.q} too small for ell={self.ell}: beta/2 must be an integer")

    @property
    def B(self) -> int:
        """Bits per coset level, ell / 64."""
        return self.ell // 64

    @property
    def D(self) -> int:
        """log2(q)."""
        return self.q.bit_length() - 1

    @property
    def beta(self) -> int:
        return self.q >> self.B


# (sigma, log2 q) per row of the published comparison table
PARAMSETS = {
    p.name: p
    for p in [
        ParamSet("frodo-640", 640, 1 << 15, 2.8, 128),
        ParamSet("frodo-976", 976, 1 << 16, 2.3, 192),
        ParamSet("frodo-1344", 1344, 1 << 16, 1.4, 256),
        ParamSet("modified-sec-640", 640, 1 << 15, 3.9, 128),
        ParamSet("modified-sec-976", 976, 1 << 16, 2.75, 192),
        ParamSet("modified-sec-1344", 1344, 1 << 16, 1.68, 256),
        ParamSet("modified-bw-640", 640, 1 << 14, 2.3, 128),
        ParamSet("modified-bw-976", 976, 1 << 15, 1.8, 192),
        ParamSet("modified-bw-1344", 1344, 1 << 15, 1.14, 256),
    ]
}

# Published figures: (security bits, bandwidth bytes, log2 Pe).  Security is
# from an external lattice estimator and is only reported, never computed.
PUBLISHED = {
    "frodo-640": (145, 9720, -138),
    "frodo-976": (210, 15744, -199),
    "frodo-1344": (275, 21632, -252),
    "modified-sec-640": (158, 9720, -149),
    "modified-sec-976": (220, 15744, -204),
    "modified-sec-1344": (287, 21632, -255),
    "modified-bw-640": (152, 9072, -152),
    "modified-bw-976": (215, 14760, -203),
    "modified-bw-1344": (283, 20280, -271),
}


def get_paramset(name: str) -> ParamSet:
    try:
        return PARAMSETS[name]
    except KeyError:
        raise KeyError(f"unknown parameter set {name!r}; choose from {', '.join(PARAMSETS)}") from None


def is_original(p: ParamSet) -> bool:
    return p.name.startswith("frodo-")
