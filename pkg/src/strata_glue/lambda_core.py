"""Exact linear algebra over Z/n.

Z/n is not a domain, so row reduction alone does not give canonical forms or
complete kernels.  The canonical representative used throughout is the Howell
form: unique per row span, closed under the annihilator rows that a composite
modulus introduces.  Modules are finitely generated quotients of free modules,
maps are matrices on ambient generators, and homology is computed by stacked
kernel solves.  All values are immutable after construction and every
operation is a pure function, so instances can be shared freely.
"""

from math import gcd


class BanalityViolation(ValueError):
    """The modulus collides with p or with (q-1)^2(q+1)."""


class BadSqrt(ValueError):
    """Claimed square root of q fails sqrt_q^2 = q mod n."""


class IllDefinedMap(ValueError):
    """Matrix does not carry source relations into target relations."""


class DegreeOutOfRange(ValueError):
    """Complex has no module at the requested degree."""


def _is_prime(p):
    if p < 2:
        return False
    d = 2
    while d * d <= p:
        if p % d == 0:
            return False
        d += 1
    return True


class CoeffRing:
    """The coefficient ring Z/n with its residue characteristic bookkeeping."""

    __slots__ = ("n", "p", "q", "sqrt_q")

    def __init__(self, n, p, sqrt_q=None):
        self.n = n
        self.p = p
        self.q = p
        self.sqrt_q = sqrt_q

    def norm(self, x):
        return x % self.n

    def is_unit(self, x):
        return gcd(x % self.n, self.n) == 1

    def inv(self, x):
        x = x % self.n
        if gcd(x, self.n) != 1:
            raise ZeroDivisionError(f"{x} is not a unit mod {self.n}")
        return pow(x, -1, self.n)

    def q_pow(self, e):
        """q^e mod n for any integer e; q is a unit by banality."""
        if e >= 0:
            return pow(self.q, e, self.n)
        return pow(self.inv(self.q), -e, self.n)

    def half_q_pow(self, e2):
        """q^(e2/2) mod n, e2 counted in half units.  Needs sqrt_q when odd."""
        if e2 % 2 == 0:
            return self.q_pow(e2 // 2)
        if self.sqrt_q is None:
            raise MissingSqrtQ("half-integral twist requires sqrt_q")
        s = self.sqrt_q if e2 > 0 else self.inv(self.sqrt_q)
        return pow(s, abs(e2), self.n)

    def __repr__(self):
        if self.sqrt_q is None:
            return f"CoeffRing(n={self.n}, p={self.p})"
        return f"CoeffRing(n={self.n}, p={self.p}, sqrt_q={self.sqrt_q})"

    def __eq__(self, other):
        return (isinstance(other, CoeffRing)
                and (self.n, self.p, self.sqrt_q) == (other.n, other.p, other.sqrt_q))

    def __hash__(self):
        return hash((self.n, self.p, self.sqrt_q))


class MissingSqrtQ(ValueError):
    """Half-integral exponent requested on a ring without sqrt_q."""


def make_ring(n, p, sqrt_q=None):
    """Validate and build the coefficient ring Z/n for residue prime p."""
    if n < 2:
        raise BanalityViolation(f"modulus {n} too small")
    if not _is_prime(p):
        raise BanalityViolation(f"residue characteristic {p} is not prime")
    if gcd(n, p) != 1:
        raise BanalityViolation(f"gcd(n={n}, p={p}) != 1")
    bad = (p - 1) * (p - 1) * (p + 1)
    if gcd(n, bad) != 1:
        raise BanalityViolation(f"gcd(n={n}, (q-1)^2(q+1)={bad}) != 1")
    if sqrt_q is not None:
        if (sqrt_q * sqrt_q - p) % n != 0:
            raise BadSqrt(f"{sqrt_q}^2 != {p} mod {n}")
        sqrt_q %= n
    return CoeffRing(n, p, sqrt_q)


class LambdaMatrix:
    """Dense matrix over Z/n, entries stored reduced, row major."""

    __slots__ = ("ring", "entries", "cols")

    def __init__(self, ring, entries, cols=None):
        n = ring.n
        rows = tuple(tuple(int(e) % n for e in row) for row in entries)
        if rows:
            cols = len(rows[0])
            if any(len(r) != cols for r in rows):
                raise ValueError("ragged matrix")
        elif cols is None:
            raise ValueError("empty matrix needs an explicit column count")
        self.ring = ring
        self.entries = rows
        self.cols = cols

    @property
    def nrows(self):
        return len(self.entries)

    def transpose(self):
        return LambdaMatrix(self.ring,
                            [[self.entries[i][j] for i in range(self.nrows)]
                             for j in range(self.cols)],
                            cols=self.nrows)

    def __repr__(self):
        return f"LambdaMatrix({self.nrows}x{self.cols} mod {self.ring.n})"


def identity_matrix(ring, k):
    return LambdaMatrix(ring, [[1 if i == j else 0 for j in range(k)]
                               for i in range(k)], cols=k)


def mat_mul(ring, a_rows, b_rows, b_cols):
    n = ring.n
    out = []
    for ar in a_rows:
        row = [0] * b_cols
        for c, br in zip(ar, b_rows):
            if c:
                for j in range(b_cols):
                    row[j] = (row[j] + c * br[j]) % n
        out.append(row)
    return out


# ----------------------------------------------------------- Howell engine

def _unit_scale(a, n):
    """A unit u with u*a = gcd(a,n) mod n.  Scans; n is machine small."""
    d = gcd(a, n)
    for u in range(1, n + 1):
        if gcd(u, n) == 1 and (u * a) % n == d:
            return u
    raise ArithmeticError("no unit normalizer found")  # unreachable


def _howell_engine(rows, n, width):
    """Howell form with transform.

    Returns (hrows, htrans, krows) where hrows is the canonical form,
    htrans expresses each canonical row as a combination of the input rows,
    and krows spans the left kernel of the input.
    """
    work = []
    for i, r in enumerate(rows):
        t = [0] * len(rows)
        t[i] = 1
        work.append(([e % n for e in r], t))

    def addmul(dst, src, c):
        row, tr = dst
        srow, str_ = src
        for j in range(width):
            row[j] = (row[j] + c * srow[j]) % n
        for j in range(len(tr)):
            tr[j] = (tr[j] + c * str_[j]) % n

    out = []
    for col in range(width):
        live = [w for w in work if any(w[0])]
        zeros = [w for w in work if not any(w[0])]
        hits = [w for w in live if w[0][col] != 0]
        rest = [w for w in live if w[0][col] == 0]
        while len(hits) > 1:
            a, b = hits[0], hits[1]
            av, bv = a[0][col], b[0][col]
            g, s, t = _xgcd(av, bv)
            u, v = -(bv // g), av // g
            new_a = ([ (s * x + t * y) % n for x, y in zip(a[0], b[0])],
                     [ (s * x + t * y) % n for x, y in zip(a[1], b[1])])
            new_b = ([ (u * x + v * y) % n for x, y in zip(a[0], b[0])],
                     [ (u * x + v * y) % n for x, y in zip(a[1], b[1])])
            hits = [new_a] + hits[2:]
            if new_b[0][col] != 0:
                hits.append(new_b)
            elif any(new_b[0]):
                rest.append(new_b)
            else:
                zeros.append(new_b)
        if hits:
            piv = hits[0]
            u = _unit_scale(piv[0][col], n)
            piv = ([(u * x) % n for x in piv[0]], [(u * x) % n for x in piv[1]])
            out.append(piv)
            ann = n // gcd(piv[0][col], n)
            arow = ([(ann * x) % n for x in piv[0]], [(ann * x) % n for x in piv[1]])
            if any(arow[0]):
                rest.append(arow)
            elif any(arow[1]):
                zeros.append(arow)
        work = rest + zeros

    # reduce entries above each pivot
    pivots = []
    for row, _ in out:
        c = next(j for j in range(width) if row[j] != 0)
        pivots.append(c)
    for i in range(len(out)):
        for k in range(i + 1, len(out)):
            c = pivots[k]
            d = out[k][0][c]
            e = out[i][0][c]
            if e % d != 0 or e >= d:
                q = e // d
                addmul(out[i], out[k], -q)

    hrows = [tuple(r) for r, _ in out]
    htrans = [tuple(t) for _, t in out]
    krows = [tuple(t) for r, t in work if not any(r) and any(t)]
    return hrows, htrans, krows


def _xgcd(a, b):
    old_r, r = a, b
    old_s, s = 1, 0
    old_t, t = 0, 1
    while r:
        q = old_r // r
        old_r, r = r, old_r - q * r
        old_s, s = s, old_s - q * s
        old_t, t = t, old_t - q * t
    return old_r, old_s, old_t


def howell_form(m):
    """Unique Howell canonical representative of the row span of m."""
    hrows, _, _ = _howell_engine(m.entries, m.ring.n, m.cols)
    return LambdaMatrix(m.ring, hrows, cols=m.cols)


def left_kernel(m):
    """Howell basis of {x : x * m = 0}."""
    _, _, krows = _howell_engine(m.entries, m.ring.n, m.cols)
    kh, _, _ = _howell_engine(krows, m.ring.n, m.nrows)
    return LambdaMatrix(m.ring, kh, cols=m.nrows)


def in_span(v, hmat):
    """Membership of a vector in the row span of a Howell-form matrix."""
    return express_in_span(v, hmat) is not None


def express_in_span(v, hmat):
    """Coefficients c with c * hmat = v, or None.  hmat must be Howell form."""
    n = hmat.ring.n
    v = [e % n for e in v]
    coeffs = [0] * hmat.nrows
    for i, row in enumerate(hmat.entries):
        c = next(j for j in range(hmat.cols) if row[j] != 0)
        d = row[c]
        if v[c] % d != 0:
            return None
        q = v[c] // d
        coeffs[i] = q % n
        for j in range(hmat.cols):
            v[j] = (v[j] - q * row[j]) % n
    if any(v):
        return None
    return coeffs


# ----------------------------------------------------------------- modules

class FgModule:
    """Quotient of a free module Lambda^ambient by a Howell-form row span.

    witness_rows, when present, are ambient vectors of an enclosing module
    that the generators of this abstract presentation came from (kernels and
    homology keep them so callers can point at actual cycles).
    """

    __slots__ = ("ring", "ambient", "relations", "witness_rows")

    def __init__(self, ring, ambient, relations=None, witness_rows=None):
        self.ring = ring
        self.ambient = ambient
        if relations is None:
            relations = LambdaMatrix(ring, [], cols=ambient)
        else:
            relations = howell_form(relations)
        if relations.cols != ambient:
            raise ValueError("relation width differs from ambient rank")
        self.relations = relations
        self.witness_rows = witness_rows

    def contains_rel(self, v):
        return in_span(v, self.relations)

    def size(self):
        span = 1
        for row in self.relations.entries:
            c = next(j for j in range(self.relations.cols) if row[j] != 0)
            span *= self.ring.n // row[c]
        return self.ring.n ** self.ambient // span

    def is_zero(self):
        return self.size() == 1

    def to_json(self):
        return {"ambient": self.ambient,
                "relations": [list(r) for r in self.relations.entries]}

    def __repr__(self):
        return f"FgModule(ambient={self.ambient}, iso={iso_class(self)})"


def free_module(ring, k):
    return FgModule(ring, k)


def quotient_module(module, rows):
    """Quotient of an FgModule by extra ambient relation rows."""
    allrows = list(module.relations.entries) + [list(r) for r in rows]
    return FgModule(module.ring, module.ambient,
                    LambdaMatrix(module.ring, allrows, cols=module.ambient))


class ModuleMap:
    """Map between FgModules.

    matrix rows are indexed by target generators, columns by source
    generators: apply(v)[i] = sum_j matrix[i][j] * v[j].  Well-definedness
    (source relations land in target relations) is checked on construction.
    """

    __slots__ = ("source", "target", "matrix")

    def __init__(self, source, target, matrix):
        if matrix.nrows != target.ambient or matrix.cols != source.ambient:
            if not (matrix.nrows == 0 and target.ambient == 0):
                raise ValueError("matrix shape does not match source/target")
        self.source = source
        self.target = target
        self.matrix = matrix
        for rel in source.relations.entries:
            if not target.contains_rel(self.apply(rel)):
                raise IllDefinedMap("source relation escapes target relations")

    def apply(self, v):
        n = self.source.ring.n
        return [sum(row[j] * v[j] for j in range(len(v))) % n
                for row in self.matrix.entries]

    def image_rows(self):
        """Images of the source generators, as target-ambient rows."""
        return self.matrix.transpose().entries


class BoundedComplex:
    """Complex of FgModules with differentials d_k : C_k -> C_{k+1}."""

    __slots__ = ("modules", "differentials")

    def __init__(self, modules, differentials):
        self.modules = dict(modules)
        self.differentials = dict(differentials)
        for k, d in self.differentials.items():
            if d.source is not self.modules.get(k) or d.target is not self.modules.get(k + 1):
                raise ValueError(f"differential at {k} detached from the complex")
        for k in self.differentials:
            if k + 1 in self.differentials:
                nxt = self.differentials[k + 1]
                for row in self.differentials[k].image_rows():
                    if not self.modules[k + 2].contains_rel(nxt.apply(row)):
                        raise ValueError(f"d_{k+1} d_{k} != 0")


def _submodule_rows(f):
    """Rows spanning {x : f(x) = 0 in target}, inside the source ambient."""
    ring = f.source.ring
    a = f.matrix.transpose()          # x * a = apply(x)
    stacked = list(a.entries) + list(f.target.relations.entries)
    kern = left_kernel(LambdaMatrix(ring, stacked, cols=a.cols))
    rows = [k[: f.source.ambient] for k in kern.entries]
    h, _, _ = _howell_engine(rows, ring.n, f.source.ambient)
    return h


def _present_subquotient(ring, ambient, gen_rows, mod_rows):
    """span(gen_rows)/span(mod_rows) presented on the given generators."""
    if not gen_rows:
        return FgModule(ring, 0, witness_rows=())
    stacked = list(gen_rows) + list(mod_rows)
    kern = left_kernel(LambdaMatrix(ring, stacked, cols=ambient))
    rel = [k[: len(gen_rows)] for k in kern.entries]
    return FgModule(ring, len(gen_rows),
                    LambdaMatrix(ring, rel, cols=len(gen_rows)) if rel
                    else None,
                    witness_rows=tuple(tuple(g) for g in gen_rows))


def kernel(f):
    """Kernel of a ModuleMap as an abstract FgModule with witness rows."""
    rows = _submodule_rows(f)
    return _present_subquotient(f.source.ring, f.source.ambient, rows,
                                f.source.relations.entries)


def homology(c, k):
    """ker(d_k)/im(d_{k-1}) at degree k of a BoundedComplex."""
    if k not in c.modules:
        raise DegreeOutOfRange(f"no module in degree {k}")
    mod = c.modules[k]
    ring = mod.ring
    if k in c.differentials:
        cycles = _submodule_rows(c.differentials[k])
    else:
        cycles = identity_matrix(ring, mod.ambient).entries
    boundaries = list(mod.relations.entries)
    if k - 1 in c.differentials:
        boundaries += c.differentials[k - 1].image_rows()
    return _present_subquotient(ring, mod.ambient, list(cycles), boundaries)


# --------------------------------------------------- Smith form, iso classes

def _snf_with_colbasis(rows, cols):
    """Integer Smith normal form tracking only the column transform.

    Returns (factors, v, vinv) with U*M*V diagonal; factors has length cols,
    padded with zeros when the matrix has lower column rank.
    """
    m = [list(r) for r in rows]
    nr, nc = len(m), cols
    v = [[1 if i == j else 0 for j in range(nc)] for i in range(nc)]
    vinv = [[1 if i == j else 0 for j in range(nc)] for i in range(nc)]

    def colswap(a, b):
        for r in m:
            r[a], r[b] = r[b], r[a]
        for r in v:
            r[a], r[b] = r[b], r[a]
        vinv[a], vinv[b] = vinv[b], vinv[a]

    def coladd(dst, src, q):
        # col_dst += q * col_src ; inverse op on vinv rows
        for r in m:
            r[dst] += q * r[src]
        for r in v:
            r[dst] += q * r[src]
        for j in range(nc):
            vinv[src][j] -= q * vinv[dst][j]

    def colneg(a):
        for r in m:
            r[a] = -r[a]
        for r in v:
            r[a] = -r[a]
        for j in range(nc):
            vinv[a][j] = -vinv[a][j]

    def rowswap(a, b):
        m[a], m[b] = m[b], m[a]

    def rowadd(dst, src, q):
        m[dst] = [x + q * y for x, y in zip(m[dst], m[src])]

    t = 0
    while t < nr and t < nc:
        # locate a minimal nonzero entry in the trailing block
        best = None
        for i in range(t, nr):
            for j in range(t, nc):
                if m[i][j] != 0 and (best is None or abs(m[i][j]) < abs(m[best[0]][best[1]])):
                    best = (i, j)
        if best is None:
            break
        i, j = best
        if i != t:
            rowswap(i, t)
        if j != t:
            colswap(j, t)
        dirty = False
        for i in range(t + 1, nr):
            if m[i][t] != 0:
                q = m[i][t] // m[t][t]
                rowadd(i, t, -q)
                if m[i][t] != 0:
                    dirty = True
        for j in range(t + 1, nc):
            if m[t][j] != 0:
                q = m[t][j] // m[t][t]
                coladd(j, t, -q)
                if m[t][j] != 0:
                    dirty = True
        if dirty:
            continue
        # divisibility sweep
        piv = m[t][t]
        culprit = None
        for i in range(t + 1, nr):
            for j in range(t + 1, nc):
                if m[i][j] % piv != 0:
                    culprit = i
                    break
            if culprit is not None:
                break
        if culprit is not None:
            rowadd(t, culprit, 1)
            continue
        if m[t][t] < 0:
            colneg(t)
        t += 1

    factors = [m[i][i] if i < nr else 0 for i in range(nc)]
    return factors, v, vinv


def _presentation_stack(module):
    rows = [list(r) for r in module.relations.entries]
    n = module.ring.n
    for i in range(module.ambient):
        row = [0] * module.ambient
        row[i] = n
        rows.append(row)
    return rows


def iso_class(module):
    """Invariant factors (> 1) of the module, largest first."""
    if module.ambient == 0:
        return []
    factors, _, _ = _snf_with_colbasis(_presentation_stack(module), module.ambient)
    return sorted((f for f in factors if f > 1), reverse=True)


def module_isomorphism(m1, m2):
    """Explicit isomorphism between modules of equal iso_class, else None."""
    if m1.ring != m2.ring or iso_class(m1) != iso_class(m2):
        return None
    n = m1.ring.n
    f1, v1, _ = _snf_with_colbasis(_presentation_stack(m1), m1.ambient)
    f2, _, v2inv = _snf_with_colbasis(_presentation_stack(m2), m2.ambient)
    # pair coordinates carrying equal invariant factors > 1
    pos1 = sorted(range(m1.ambient), key=lambda i: -f1[i])
    pos2 = sorted(range(m2.ambient), key=lambda i: -f2[i])
    pairing = [[0] * m2.ambient for _ in range(m1.ambient)]
    for a, b in zip(pos1, pos2):
        if f1[a] > 1:
            pairing[a][b] = 1
    # x |-> ((x * v1) * pairing) * v2inv, assembled as one ambient matrix
    comp = mat_mul(m1.ring, v1, pairing, m2.ambient)
    comp = mat_mul(m1.ring, comp, v2inv, m2.ambient)
    mat = LambdaMatrix(m1.ring, comp, cols=m2.ambient).transpose()
    try:
        return ModuleMap(m1, m2, mat)
    except IllDefinedMap:
        return None
