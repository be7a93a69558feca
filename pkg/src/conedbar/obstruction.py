"""Line bundle cohomology on curves and the obstruction tables built from it.

The exceptional curve X of the resolution has normal bundle N of degree -e, so
N^{-mu} has degree e*mu.  Dimensions come from Riemann-Roch,

    h0 - h1 = deg + 1 - genus,

together with Serre duality h1(L) = h0(K - L) and the vanishing of h0 in
negative degree.  Where these two facts do not pin the answer down (special
degrees on curves of genus >= 2, degree 0 on elliptic curves without a
triviality hint) the row is reported as indeterminate (None).
"""
from dataclasses import dataclass, field

HOLDS = "holds"
FAILS = "fails"
INDETERMINATE = "indeterminate"

# hypothesis identifiers: T14 and T81 need h1 = 0 on the rows mu >= 1 (bounded solvability
# and its converse); T12 also needs the rows -k0 <= mu <= 0 (weighted L^2 solvability)
THEOREMS = ("T12", "T14", "T81")


def rr_dims(genus, deg, triviality_hint=None):
    """(h0, h1) of a degree-``deg`` line bundle on a curve of the given genus.

    ``triviality_hint`` only matters in degree 0 (for genus >= 1): True means the
    structure sheaf, False a nontrivial degree-0 bundle, None unknown.
    """
    genus, deg = int(genus), int(deg)
    if genus < 0:
        raise ValueError("genus must be non-negative")
    if genus == 0:
        return max(0, deg + 1), max(0, -deg - 1)
    if deg < 0:
        return 0, genus - 1 - deg
    if deg > 2 * genus - 2:
        return deg + 1 - genus, 0
    if deg == 0 and triviality_hint is not None:
        # O_X has h0 = 1; a nontrivial degree-0 bundle has no sections
        h0 = 1 if triviality_hint else 0
        return h0, h0 - 1 + genus
    return None, None


@dataclass(frozen=True)
class CurveSpec:
    genus: int
    e: int
    triviality_hint: object = None  # applies to degree-0 rows other than mu = 0

    def __post_init__(self):
        if self.genus < 0:
            raise ValueError("genus must be non-negative")
        if self.e < 1:
            raise ValueError("embedding degree e must be positive")

    @property
    def exact(self):
        return self.genus <= 1

    def bundle_degree(self, mu):
        """Degree of N^{-mu}."""
        return self.e * mu

    def dims(self, mu):
        hint = True if mu == 0 else self.triviality_hint
        if self.genus == 1 and self.bundle_degree(mu) == 0 and hint is None:
            hint = False
        return rr_dims(self.genus, self.bundle_degree(mu), hint)

    def vanishing_from(self):
        """Smallest mu0 with h1(N^{-mu}) = 0 known analytically for every mu >= mu0."""
        # deg = e*mu > 2g - 2 forces h1 = 0
        mu0 = (2 * self.genus - 2) // self.e + 1
        if self.genus == 0:
            mu0 = min(mu0, 0)
        return mu0


@dataclass(frozen=True)
class Row:
    mu: int
    deg: int
    h0: object
    h1: object

    @property
    def determinate(self):
        return self.h0 is not None and self.h1 is not None


def _verdict(rows):
    if any(r.h1 is not None and r.h1 > 0 for r in rows):
        return FAILS
    if any(r.h1 is None for r in rows):
        return INDETERMINATE
    return HOLDS


@dataclass
class ObstructionTable:
    curve: CurveSpec
    k: int
    rows: list
    verdict_T12: str
    verdict_T14: str
    verdict_T81: str
    h1_M: object
    k0: int = 1
    scanned_bound: object = None
    scan_range: tuple = ()
    notes: list = field(default_factory=list)

    def row(self, mu):
        for r in self.rows:
            if r.mu == mu:
                return r
        raise KeyError(mu)

    def verdict(self, theorem):
        return getattr(self, f"verdict_{theorem}")

    def riemann_roch_defects(self):
        """Determinate rows violating h0 - h1 = deg + 1 - genus (empty when consistent)."""
        g = self.curve.genus
        return [r for r in self.rows if r.determinate and r.h0 - r.h1 != r.deg + 1 - g]

    def as_dict(self):
        return {
            "genus": self.curve.genus,
            "e": self.curve.e,
            "k": self.k,
            "k0": self.k0,
            "rows": [{"mu": r.mu, "deg": r.deg, "h0": r.h0, "h1": r.h1} for r in self.rows],
            "verdict_T12": self.verdict_T12,
            "verdict_T14": self.verdict_T14,
            "verdict_T81": self.verdict_T81,
            "h1_M": self.h1_M,
            "scanned_bound": self.scanned_bound,
            "scan_range": list(self.scan_range),
        }

    def to_text(self):
        def cell(x):
            return "?" if x is None else str(x)

        header = ("mu", "deg", "h0", "h1")
        body = [(str(r.mu), str(r.deg), cell(r.h0), cell(r.h1)) for r in self.rows]
        widths = [max(len(h), *(len(b[i]) for b in body)) if body else len(h) for i, h in enumerate(header)]
        lines = ["  ".join(h.rjust(w) for h, w in zip(header, widths))]
        lines += ["  ".join(c.rjust(w) for c, w in zip(b, widths)) for b in body]
        lines.append(f"genus={self.curve.genus} e={self.curve.e} k={self.k} k0={self.k0}")
        lines.append(f"T12: {self.verdict_T12}  T14: {self.verdict_T14}  T81: {self.verdict_T81}")
        lines.append(f"h1(M, O_M): {cell(self.h1_M)}")
        lines.append(f"scanned bound: {cell(self.scanned_bound)}")
        return "\n".join(lines) + "\n"


def _rows(curve, mus):
    out = []
    for mu in mus:
        h0, h1 = curve.dims(mu)
        out.append(Row(mu, curve.bundle_degree(mu), h0, h1))
    return out


def _tail_rows(curve, start):
    """Rows from ``start`` up to the analytic vanishing threshold; beyond it h1 = 0."""
    return _rows(curve, range(start, max(start, curve.vanishing_from())))


def hypothesis_rows(theorem, curve, k0=1):
    """Rows whose h1 must vanish for the hypothesis of ``theorem``."""
    if theorem in ("T14", "T81"):
        # H^1(X, O(N^{-mu})) = 0 for all mu >= 1; T81 is the same condition, necessary and sufficient
        return _tail_rows(curve, 1)
    if theorem == "T12":
        # H^1(X, O(N^{mu})) = 0 for all mu <= k0, i.e. N^{-mu} for mu >= -k0
        return _tail_rows(curve, -k0)
    raise ValueError(f"unknown theorem {theorem!r}; expected one of {THEOREMS}")


def hypothesis_check(theorem, curve, k0=1):
    """(verdict, witness rows) for the cohomological hypothesis of ``theorem``."""
    rows = hypothesis_rows(theorem, curve, k0)
    return _verdict(rows), rows


def resolution_cohomology(curve):
    """dim H^1(M, O_M) = sum over mu >= 0 of h1(X, O(N^{-mu})); None if a summand is unknown."""
    total = 0
    for r in _tail_rows(curve, 0):
        if r.h1 is None:
            return None
        total += r.h1
    return total


def scanned_nu_bound(curve, nu_max=12):
    """Smallest nu in 1..nu_max with h1(N^{-nu*mu}) = 0 for every mu >= 1, or None.

    This is what the vanishing on D in E^nu needs for positive weights; it is
    found by scanning, not derived, so it is only an upper estimate for the
    existence-only index.
    """
    for nu in range(1, nu_max + 1):
        scaled = CurveSpec(curve.genus, curve.e * nu, curve.triviality_hint)
        if _verdict(_tail_rows(scaled, 1)) == HOLDS:
            return nu
    return None


def obstruction_table(curve, k=1, mu_range=None, k0=1, nu_max=12):
    """Rows (mu, deg N^{-mu}, h0, h1) for mu in ``mu_range`` plus theorem verdicts.

    Verdicts combine the listed rows with the analytic tail, so they do not
    depend on how far ``mu_range`` reaches.
    """
    if mu_range is None:
        mu_range = range(k, max(k, curve.vanishing_from()) + 3)
    mus = sorted(set(int(m) for m in mu_range))
    rows = _rows(curve, mus)
    table = ObstructionTable(
        curve=curve,
        k=k,
        rows=rows,
        verdict_T12=hypothesis_check("T12", curve, k0)[0],
        verdict_T14=hypothesis_check("T14", curve, k0)[0],
        verdict_T81=hypothesis_check("T81", curve, k0)[0],
        h1_M=resolution_cohomology(curve),
        k0=k0,
        scanned_bound=scanned_nu_bound(curve, nu_max),
        scan_range=(1, nu_max),
    )
    if any(not r.determinate for r in rows):
        table.notes.append("indeterminate rows: bundle data beyond the degree is needed")
    return table


def weighted_sum(curve, k):
    """dim of the direct sum over mu >= k of H^1(X, O(N^{-mu})), or None if unknown."""
    total = 0
    for r in _tail_rows(curve, k):
        if r.h1 is None:
            return None
        total += r.h1
    return total
