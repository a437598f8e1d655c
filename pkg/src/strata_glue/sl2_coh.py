"""Group cohomology of level models through the tree of lattice classes.

The tree on which SL2 of a local field acts has one vertex per similarity
class of rank-2 lattices; a ball of radius r around the standard vertex is
finite, and its distance-d shell matches the level-d projective line, which
is exactly the labeling the finite models already use.  Restricting the
cellular resolution of that tree to a representation collapses cohomology
onto a single difference map sigma^U (+) sigma^{U'} -> sigma^{Gamma_0},
written here in the Howell coordinates of the Iwahori-fixed block.  Kernel
and cokernel of that map are the only degrees that survive banality, and
inverting its 2x2 specialization is the desk-size form of the unramified
principal-series vanishing statement.
"""

from fractions import Fraction

from .lambda_core import (
    BoundedComplex,
    LambdaMatrix,
    ModuleMap,
    express_in_span,
    free_module,
    iso_class,
    kernel,
    make_ring,
    quotient_module,
)
from .padic_core import (
    PrecisionExhausted,
    ProjPoint,
    SubgroupSpec,
    act,
    enumerate_p1,
)
from .finite_rep import dual_rep, fixed_points, induced_rep, unram_pair


class AcyclicityFailed(RuntimeError):
    """The principal-series difference map is not invertible over Lambda."""

    def __init__(self, matrix):
        super().__init__(f"difference map {matrix} has no inverse")
        self.matrix = matrix


# ------------------------------------------------------------------ the ball

_ROOT = (0, None)


class TreeBall:
    """Radius-r piece of the lattice-class tree around the standard vertex.

    Vertices are (distance, point) pairs: the distance-d shell is the level-d
    projective line, and each point names the Hermite-canonical lattice
    returned by lattice_basis.  Edges join a shell point to its level-(d-1)
    projection.  Colors alternate with distance and name the stabilizer kind
    of each facet up to conjugacy.
    """

    __slots__ = ("p", "radius", "precision", "vertices", "edges", "colors",
                 "stabilizers", "_children")

    def __init__(self, p, radius, precision):
        self.p = p
        self.radius = radius
        self.precision = precision
        verts = [_ROOT]
        edges = []
        for d in range(1, radius + 1):
            for pt in enumerate_p1(p, d):
                verts.append((d, pt))
                parent = _ROOT if d == 1 else (d - 1, pt.project(d - 1))
                edges.append(((d, pt), parent))
        self.vertices = tuple(verts)
        self.edges = tuple(edges)
        self.colors = {v: "U" if v[0] % 2 == 0 else "Uprime" for v in verts}
        stabs = {v: SubgroupSpec(self.colors[v], 1) for v in verts}
        for e in edges:
            stabs[e] = SubgroupSpec("Gamma0", 1)
        self.stabilizers = stabs
        self._children = {v: [] for v in verts}
        for child, parent in edges:
            self._children[parent].append(child)

    @property
    def base_edge(self):
        return ((1, ProjPoint.big_cell(self.p, 1, 0)), _ROOT)

    def check_regular(self):
        """Assert the homogeneous tree shape; True when every count fits."""
        p = self.p
        if len(self._children[_ROOT]) != p + 1:
            raise RuntimeError("root valence is off")
        for v in self.vertices:
            d = v[0]
            kids = len(self._children[v])
            if d == 0:
                continue
            want = p if d < self.radius else 0
            if kids != want:
                raise RuntimeError(f"vertex {v} has {kids} children")
        return True

    def lattice_basis(self, label):
        """Hermite-reduced basis of the canonical representative lattice."""
        d, pt = label
        if d == 0:
            return ((1, 0), (0, 1))
        md = self.p ** d
        if pt.branch == "b":
            return ((1, pt.res), (0, md))
        return ((md, 0), (pt.res, 1))

    def eta_image(self, label):
        """Translate by diag(1, pi); None when pushed outside the ball."""
        d, pt = label
        if d == 0:
            return (1, ProjPoint.big_cell(self.p, 1, 0))
        if pt.branch == "b":
            if d + 1 > self.radius:
                return None
            return (d + 1, ProjPoint.big_cell(self.p, d + 1, pt.res * self.p))
        s1 = pt.res // self.p
        if d == 1:
            return _ROOT
        if s1 % self.p == 0:
            return (d - 1, ProjPoint.inf_cell(self.p, d - 1, s1))
        # the scaled lattice leads with a unit, so it flips branch
        t = pow(s1, -1, self.p ** (d - 1))
        return (d - 1, ProjPoint.big_cell(self.p, d - 1, t))

    def vertex_image(self, label, g):
        """Image of a vertex under an integral matrix; shells are preserved."""
        if g.maxneg() > 0:
            raise ValueError("the ball only carries the integral action")
        d, pt = label
        if d == 0:
            return label
        y, _ = act(pt, g, d)
        return (d, y)

    def chain_complex(self, ring):
        """Cellular chains, edges -> vertices -> Lambda, as one complex."""
        nv, ne = len(self.vertices), len(self.edges)
        index = {v: i for i, v in enumerate(self.vertices)}
        rows = [[0] * ne for _ in range(nv)]
        for j, (child, parent) in enumerate(self.edges):
            rows[index[child]][j] = 1
            rows[index[parent]][j] = ring.n - 1
        c1 = free_module(ring, ne)
        c0 = free_module(ring, nv)
        aug = free_module(ring, 1)
        boundary = ModuleMap(c1, c0, LambdaMatrix(ring, rows, cols=ne))
        degree = ModuleMap(c0, aug, LambdaMatrix(ring, [[1] * nv], cols=nv))
        return BoundedComplex({0: c1, 1: c0, 2: aug},
                              {0: boundary, 1: degree})

    def homology(self, ring):
        """H0 and H1 of the unaugmented cellular complex."""
        c = self.chain_complex(ring)
        boundary = c.differentials[0]
        h0 = quotient_module(c.modules[1], boundary.image_rows())
        h1 = kernel(boundary)
        return {0: h0, 1: h1}

    def to_dot(self):
        ids = {v: f"v{i}" for i, v in enumerate(self.vertices)}
        names = {v: "base" if v[0] == 0 else f"{v[1]}@{v[0]}"
                 for v in self.vertices}
        lines = [f"graph ball_p{self.p}_r{self.radius} {{"]
        for v in self.vertices:
            fill = "white" if self.colors[v] == "U" else "gray80"
            lines.append(f'  {ids[v]} [label="{names[v]}", '
                         f'tooltip="{self.colors[v]}", '
                         f'style=filled, fillcolor={fill}];')
        for child, parent in self.edges:
            lines.append(f"  {ids[child]} -- {ids[parent]};")
        lines.append("}")
        return "\n".join(lines)

    def __repr__(self):
        return (f"TreeBall(p={self.p}, r={self.radius}, "
                f"{len(self.vertices)} vertices)")


def bt_ball(p, r, precision=None):
    """Ball of radius r; labels need residues through level r."""
    if r < 1:
        raise ValueError("a ball needs radius at least 1")
    if precision is None:
        precision = r + 2
    if precision < r + 1:
        raise PrecisionExhausted(
            f"radius-{r} labels need {r + 1} digits, have {precision}")
    return TreeBall(p, r, precision)


# ------------------------------------------------- the two-term complex

class SSComplex:
    """Difference map sigma^U (+) sigma^{U'} -> sigma^{Gamma_0}.

    delta is written on the Howell generators of the Iwahori-fixed block:
    one source column per fixed-line generator, U columns first, the U'
    block carried with a minus sign.
    """

    __slots__ = ("sigma", "u_fixed", "uprime_fixed", "gamma0_fixed", "delta")

    def __init__(self, sigma, u_fixed, uprime_fixed, gamma0_fixed, delta):
        self.sigma = sigma
        self.u_fixed = u_fixed
        self.uprime_fixed = uprime_fixed
        self.gamma0_fixed = gamma0_fixed
        self.delta = delta

    def __repr__(self):
        return (f"SSComplex({self.delta.source.ambient} -> "
                f"{self.delta.target.ambient})")


def ss_complex(sigma):
    """Two-term fixed-point complex of a level model."""
    ring = sigma.ring
    lvl = sigma.level
    u_fixed = fixed_points(sigma, SubgroupSpec("U", lvl))
    uprime_fixed = fixed_points(sigma, SubgroupSpec("Uprime", lvl))
    gamma0_fixed = fixed_points(sigma, SubgroupSpec("Gamma0", lvl))
    gmat = LambdaMatrix(ring, gamma0_fixed.witness_rows, cols=sigma.rank)
    cols = []
    for w in u_fixed.witness_rows:
        cols.append(express_in_span(list(w), gmat))
    for w in uprime_fixed.witness_rows:
        c = express_in_span(list(w), gmat)
        cols.append(None if c is None else [(-x) % ring.n for x in c])
    if any(c is None for c in cols):
        raise RuntimeError("a fixed line escapes the Iwahori-fixed block")
    k = gmat.nrows
    entries = [[cols[j][i] for j in range(len(cols))] for i in range(k)]
    delta = ModuleMap(free_module(ring, len(cols)), free_module(ring, k),
                      LambdaMatrix(ring, entries, cols=len(cols)))
    return SSComplex(sigma, u_fixed, uprime_fixed, gamma0_fixed, delta)


def _two_degrees(ss):
    ring = ss.sigma.ring
    h0 = kernel(ss.delta)
    h1 = quotient_module(free_module(ring, ss.delta.target.ambient),
                         ss.delta.image_rows())
    return {0: h0, 1: h1}


def sl2_cohomology(sigma):
    """Kernel and cokernel of the difference map; higher degrees vanish."""
    return _two_degrees(ss_complex(sigma))


def cohomology_report(sigma):
    """JSON-shaped invariant factors of the two surviving degrees."""
    h = sl2_cohomology(sigma)
    return {"H0": iso_class(h[0]), "H1": iso_class(h[1])}


def sl2_homology(sigma):
    """Degrees 0 and -1, via the cohomology of the contragredient.

    Finite modules over Z/n are non-canonically their own duals, so the
    computed presentations stand in for the dual modules.
    """
    coh = _two_degrees(ss_complex(dual_rep(sigma)))
    return {0: coh[0], -1: coh[1]}


# --------------------------------------------------------------- acyclicity

def ps1_acyclicity_check(p, n, sqrt_q, level=2, chi=None):
    """Both degrees of the half-density induced model must vanish.

    The default character is the inverse square-root modulus pair; passing
    another unit pair turns the check into its own control experiment.  The
    determinant of the 2x2 difference map is surfaced as "unit" but its
    exact value is deliberately not certified.
    """
    ring = make_ring(n, p, sqrt_q)
    if chi is None:
        chi = unram_pair(ring, Fraction(1, 2), Fraction(-1, 2))
    sigma = induced_rep(ring, chi, level)
    ss = ss_complex(sigma)
    mat = ss.delta.matrix
    if (mat.nrows, mat.cols) != (2, 2):
        raise RuntimeError("difference map is not the expected 2x2 block")
    e = mat.entries
    det = (e[0][0] * e[1][1] - e[0][1] * e[1][0]) % n
    h = _two_degrees(ss)
    if not (h[0].is_zero() and h[1].is_zero()):
        raise AcyclicityFailed(e)
    return {"p": p, "n": n, "sqrt_q": sqrt_q, "level": level,
            "matrix": e, "unit": det,
            "H0": iso_class(h[0]), "H1": iso_class(h[1]),
            "vanishes": True}
