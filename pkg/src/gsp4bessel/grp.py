"""Exact 4x4 matrices over F and L, the named group elements, and membership tests."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Optional, Sequence, Union

from .padicbase import INF, FieldData, LElement, fval

Entry = Union[Fraction, LElement]


class ParameterError(ValueError):
    """A named element was requested outside its parameter domain."""



class Matrix:
    """Immutable square matrix with exact entries (Fractions or LElements)."""

    __slots__ = ("rows", "n")

    def __init__(self, rows: Iterable[Iterable]):
        self.rows = tuple(
            tuple(e if isinstance(e, (Fraction, LElement)) else Fraction(e) for e in row) for row in rows
        )
        self.n = len(self.rows)
        if any(len(r) != self.n for r in self.rows):
            raise ValueError("matrix must be square")

    @classmethod
    def identity(cls, n: int = 4) -> "Matrix":
        return cls([[1 if i == j else 0 for j in range(n)] for i in range(n)])

    @classmethod
    def diag(cls, *entries) -> "Matrix":
        n = len(entries)
        return cls([[entries[i] if i == j else 0 for j in range(n)] for i in range(n)])

    def __getitem__(self, ij: tuple[int, int]) -> Entry:
        return self.rows[ij[0]][ij[1]]

    @classmethod
    def _trusted(cls, rows: tuple) -> "Matrix":
        """Wrap rows whose entries are already exact; skips coercion."""
        m = object.__new__(cls)
        m.rows = rows
        m.n = len(rows)
        return m

    def __matmul__(self, other: "Matrix") -> "Matrix":
        if not self.n:
            return self
        cols = tuple(zip(*other.rows))
        zero = Fraction(0)
        out = []
        for row in self.rows:
            new = []
            for col in cols:
                acc = zero
                for a, b in zip(row, col):
                    if a and b:
                        acc = acc + a * b
                new.append(acc)
            out.append(tuple(new))
        return Matrix._trusted(tuple(out))

    def scale(self, s) -> "Matrix":
        return Matrix([[e * s for e in row] for row in self.rows])

    def __add__(self, other: "Matrix") -> "Matrix":
        return Matrix([[a + b for a, b in zip(r1, r2)] for r1, r2 in zip(self.rows, other.rows)])

    def __sub__(self, other: "Matrix") -> "Matrix":
        return Matrix([[a - b for a, b in zip(r1, r2)] for r1, r2 in zip(self.rows, other.rows)])

    def __neg__(self) -> "Matrix":
        return self.scale(-1)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Matrix) or other.n != self.n:
            return NotImplemented
        return all(a == b for r1, r2 in zip(self.rows, other.rows) for a, b in zip(r1, r2))

    def __hash__(self) -> int:
        return hash(tuple(str(e) for row in self.rows for e in row))

    def transpose(self) -> "Matrix":
        return Matrix(list(zip(*self.rows)))

    def conj(self) -> "Matrix":
        return Matrix([[e.conj() if isinstance(e, LElement) else e for e in row] for row in self.rows])

    def is_over_F(self) -> bool:
        return all(not isinstance(e, LElement) or e.in_base() for row in self.rows for e in row)

    def to_F(self) -> "Matrix":
        return Matrix([[e.base_value() if isinstance(e, LElement) else e for e in row] for row in self.rows])

    def det(self) -> Entry:
        if self.n == 1:
            return self.rows[0][0]
        if self.n == 2:
            (a, b), (c, d) = self.rows
            return a * d - b * c
        total = 0
        for j, e in enumerate(self.rows[0]):
            if e == 0:
                continue
            minor = Matrix([row[:j] + row[j + 1 :] for row in self.rows[1:]])
            term = e * minor.det()
            total = total + term if j % 2 == 0 else total - term
        return total

    def inverse(self) -> "Matrix":
        """Gauss-Jordan inverse over F; raises ZeroDivisionError if singular."""
        if not self.is_over_F():
            raise TypeError("generic inverse is only available over F; use similitude_inverse")
        n = self.n
        aug = [list(row) + [Fraction(int(i == j)) for j in range(n)] for i, row in enumerate(self.to_F().rows)]
        for col in range(n):
            pivot = next((r for r in range(col, n) if aug[r][col] != 0), None)
            if pivot is None:
                raise ZeroDivisionError("singular matrix")
            aug[col], aug[pivot] = aug[pivot], aug[col]
            inv = 1 / aug[col][col]
            aug[col] = [e * inv for e in aug[col]]
            for r in range(n):
                if r != col and aug[r][col] != 0:
                    f = aug[r][col]
                    aug[r] = [a - f * b for a, b in zip(aug[r], aug[col])]
        return Matrix([row[n:] for row in aug])

    def block(self, i: int, j: int) -> "Matrix":
        """The 2x2 block in block-row i, block-column j of a 4x4 matrix."""
        return Matrix([row[2 * j : 2 * j + 2] for row in self.rows[2 * i : 2 * i + 2]])

    @classmethod
    def from_blocks(cls, a: "Matrix", b: "Matrix", c: "Matrix", d: "Matrix") -> "Matrix":
        top = [ra + rb for ra, rb in zip(a.rows, b.rows)]
        bottom = [rc + rd for rc, rd in zip(c.rows, d.rows)]
        return cls(top + bottom)

    def __repr__(self) -> str:
        return "Matrix([" + ", ".join("[" + ", ".join(str(e) for e in row) + "]" for row in self.rows) + "])"

    def serialize(self) -> list[list[str]]:
        return [[str(e) for e in row] for row in self.rows]


def zero2() -> Matrix:
    return Matrix([[0, 0], [0, 0]])


J = Matrix([[0, 0, 1, 0], [0, 0, 0, 1], [-1, 0, 0, 0], [0, -1, 0, 0]])
S1 = Matrix([[0, 1, 0, 0], [1, 0, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]])
S2 = Matrix([[0, 0, 1, 0], [0, 1, 0, 0], [-1, 0, 0, 0], [0, 0, 0, 1]])

WEYL_WORDS = ("1", "s1", "s2", "s1s2", "s2s1", "s1s2s1", "s2s1s2", "s1s2s1s2")
WEYL_ONE = ("1", "s2", "s2s1", "s2s1s2")
WORD_LENGTH = {w: (0 if w == "1" else len(w) // 2) for w in WEYL_WORDS}


def weyl(word: str) -> Matrix:
    """Product of the simple reflections spelled by ``word`` (e.g. ``"s1s2"``)."""
    if word not in WEYL_WORDS:
        raise ParameterError(f"unknown Weyl word {word!r}")
    out = Matrix.identity()
    for k in range(0, len(word) if word != "1" else 0, 2):
        out = out @ (S1 if word[k : k + 2] == "s1" else S2)
    return out


def eta0(p: int) -> Matrix:
    return Matrix([[0, 0, 0, 1], [0, 0, 1, 0], [0, p, 0, 0], [p, 0, 0, 0]])


def h_lm(p: int, l: int, m: int) -> Matrix:
    if m < 0:
        raise ParameterError("h(l,m) needs m >= 0")
    pw = Fraction(p)
    return Matrix.diag(pw ** (2 * m + l), pw ** (m + l), 1, pw**m)


def W_w(w) -> Matrix:
    w = Fraction(w)
    return Matrix([[1, 0, 0, 0], [w, 1, 0, 0], [0, 0, 1, -w], [0, 0, 0, 1]])


def u1(w) -> Matrix:
    """The Klingen-type unipotent summed over in the first projection condition."""
    w = Fraction(w)
    return Matrix([[1, w, 0, 0], [0, 1, 0, 0], [0, 0, 1, 0], [0, 0, -w, 1]])


def u2(y) -> Matrix:
    """The lower unipotent summed over in the second projection condition."""
    y = Fraction(y)
    return Matrix([[1, 0, 0, 0], [0, 1, 0, 0], [y, 0, 1, 0], [0, 0, 0, 1]])


def upper13(t) -> Matrix:
    t = Fraction(t)
    return Matrix([[1, 0, t, 0], [0, 1, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1]])


def U_X(x11, x12, x22) -> Matrix:
    x11, x12, x22 = Fraction(x11), Fraction(x12), Fraction(x22)
    return Matrix([[1, 0, x11, x12], [0, 1, x12, x22], [0, 0, 1, 0], [0, 0, 0, 1]])


def center(z) -> Matrix:
    z = Fraction(z)
    return Matrix.diag(z, z, z, z)


def embed_levi(g2: Matrix) -> Matrix:
    """``g -> diag(g, det(g) * transpose(g)^-1)`` into the Siegel Levi."""
    dt = g2.det()
    lower = g2.transpose().inverse().scale(dt)
    return Matrix.from_blocks(g2, zero2(), zero2(), lower)


def torus_block(fd: FieldData, zeta: LElement) -> Matrix:
    """The 2x2 matrix in T(F) corresponding to ``zeta``."""
    x, y = fd.to_xy(zeta)
    return Matrix([[x + fd.b * y / 2, fd.c * y], [-fd.a * y, x - fd.b * y / 2]])


def torus_element(fd: FieldData, g2: Matrix) -> LElement:
    """Inverse of :func:`torus_block`; raises if ``g2`` is not in T(F)."""
    (m11, m12), (m21, m22) = g2.rows
    y = m12 / fd.c
    x = (m11 + m22) / 2
    if torus_block(fd, fd.from_xy(x, y)) != g2:
        raise ParameterError("matrix is not in the torus T(F)")
    return fd.from_xy(x, y)


def T_zeta(fd: FieldData, zeta: LElement) -> Matrix:
    if zeta.norm() == 0:
        raise ParameterError("zeta must be invertible")
    return embed_levi(torus_block(fd, zeta))


def eta(fd: FieldData) -> Matrix:
    return eta_m(fd, 0)


def eta_m(fd: FieldData, m: int) -> Matrix:
    a = fd.alpha * Fraction(fd.p) ** m
    one, zero = fd.embed(1), fd.embed(0)
    return Matrix(
        [[one, zero, zero, zero], [a, one, zero, zero], [zero, zero, one, -a.conj()], [zero, zero, zero, one]]
    )


def lift_to_L(fd: FieldData, g: Matrix) -> Matrix:
    return Matrix([[e if isinstance(e, LElement) else fd.embed(e) for e in row] for row in g.rows])


# Similitude and inverses ---------------------------------------------------


def similitude(g: Matrix, form: str = "H") -> Optional[Fraction]:
    """``mu`` with ``g^T J g = mu J`` (form H) or ``conj(g)^T J g = mu J`` (form G)."""
    if form == "H":
        if not g.is_over_F():
            return None
        g = g.to_F()
        lhs = g.transpose() @ J @ g
    elif form == "G":
        lhs = g.conj().transpose() @ J @ g
    else:
        raise ParameterError(f"unknown form {form!r}")
    mu = lhs[0, 2]
    if isinstance(mu, LElement):
        if not mu.in_base():
            return None
        mu = mu.base_value()
    if mu == 0 or lhs != J.scale(mu):
        return None
    return Fraction(mu)


def similitude_inverse(g: Matrix, form: str = "H") -> Matrix:
    """``g^-1 = mu^-1 J^-1 conj(g)^T J`` for similitudes."""
    mu = similitude(g, form)
    if mu is None:
        raise ParameterError("not a similitude")
    gt = g.transpose() if form == "H" else g.conj().transpose()
    return (J.scale(-1) @ gt @ J).scale(1 / mu)


def h_inverse(g: Matrix) -> Matrix:
    return similitude_inverse(g, "H")


# Membership ----------------------------------------------------------------

IWAHORI_ZERO_PATTERN = ((0, 1), (2, 0), (2, 1), (3, 0), (3, 1), (3, 2))


def _min_fval(entries: Iterable[Fraction], p: int):
    return min((fval(e, p) for e in entries), default=INF)


def entry_level(fd: FieldData, e: Entry):
    """Largest n with ``e`` in P^n (valuation of the {1, alpha} coordinates)."""
    if isinstance(e, LElement):
        u, v = fd.to_basis(e)
        return min(fval(u, fd.p), fval(v, fd.p))
    return fval(e, fd.p)


def in_iwahori(g: Matrix, p: int) -> bool:
    if not g.is_over_F():
        return False
    g = g.to_F()
    if _min_fval((e for row in g.rows for e in row), p) < 0:
        return False
    for i, j in IWAHORI_ZERO_PATTERN:
        if fval(g[i, j], p) < 1:
            return False
    mu = similitude(g, "H")
    return mu is not None and fval(mu, p) == 0


def in_KH(g: Matrix, p: int) -> bool:
    if not g.is_over_F():
        return False
    g = g.to_F()
    if _min_fval((e for row in g.rows for e in row), p) < 0:
        return False
    mu = similitude(g, "H")
    return mu is not None and fval(mu, p) == 0


def in_KG(fd: FieldData, g: Matrix) -> bool:
    g = lift_to_L(fd, g)
    if min(entry_level(fd, e) for row in g.rows for e in row) < 0:
        return False
    mu = similitude(g, "G")
    return mu is not None and fval(mu, fd.p) == 0


def in_Gamma(fd: FieldData, g: Matrix, n: int) -> bool:
    if not in_KG(fd, g):
        return False
    diff = lift_to_L(fd, g) - lift_to_L(fd, Matrix.identity())
    return all(entry_level(fd, e) >= n for row in diff.rows for e in row)


def in_gl2_integral(g2: Matrix, p: int) -> bool:
    g2 = g2.to_F()
    return _min_fval((e for row in g2.rows for e in row), p) >= 0 and fval(g2.det(), p) == 0


def in_K0_gl2(g2: Matrix, p: int, n: int) -> bool:
    """``GL2(o)`` with lower-left entry in p^n."""
    return in_gl2_integral(g2, p) and fval(g2.to_F()[1, 0], p) >= n


def in_K0_newform(g2: Matrix, p: int, n: int) -> bool:
    """The newform level group: ``GL2(o)`` with ``a in 1+p^n``, ``c in p^n``, ``d`` a unit."""
    if not in_gl2_integral(g2, p):
        return False
    if n == 0:
        return True
    (a, _), (c, d) = g2.to_F().rows
    return fval(a - 1, p) >= n and fval(c, p) >= n and fval(d, p) == 0


def subgroup_test(fd: FieldData, g: Matrix, which: str, n: int = 0) -> bool:
    p = fd.p
    if which == "I":
        return in_iwahori(g, p)
    if which == "KH":
        return in_KH(g, p)
    if which == "KG":
        return in_KG(fd, g)
    if which == "GammaPn":
        return in_Gamma(fd, g, n)
    if which == "K0_GL2":
        return in_K0_gl2(g, p, n)
    if which == "K0_newform":
        return in_K0_newform(g, p, n)
    raise ParameterError(f"unknown subgroup {which!r}")


# Named elements by tag -----------------------------------------------------


@dataclass(frozen=True)
class NamedTag:
    tag: str
    l: int = 0
    m: int = 0
    w: Fraction = Fraction(0)
    X: tuple = (0, 0, 0)
    zeta: Optional[LElement] = None
    z: Fraction = Fraction(1)


def named(fd: FieldData, t: NamedTag) -> Matrix:
    p = fd.p
    builders: dict[str, Callable[[], Matrix]] = {
        "s1": lambda: S1,
        "s2": lambda: S2,
        "eta0": lambda: eta0(p),
        "eta": lambda: eta(fd),
        "eta_m": lambda: eta_m(fd, t.m),
        "h_lm": lambda: h_lm(p, t.l, t.m),
        "W_w": lambda: W_w(t.w),
        "U_X": lambda: U_X(*t.X),
        "T_zeta": lambda: T_zeta(fd, t.zeta),
        "center_z": lambda: center(t.z),
    }
    if t.tag not in builders:
        raise ParameterError(f"unknown tag {t.tag!r}")
    if t.tag == "T_zeta" and t.zeta is None:
        raise ParameterError("T_zeta needs zeta")
    return builders[t.tag]()


# Bruhat cells of K^H modulo I ----------------------------------------------


def _cell_unipotents(word: str) -> tuple[int, Callable[..., list[list[int]]]]:
    """Number of residue parameters and the unipotent factor of each displayed cell."""
    table = {
        "1": (0, lambda: [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1]]),
        "s1": (1, lambda x: [[1, 0, 0, 0], [x, 1, 0, 0], [0, 0, 1, -x], [0, 0, 0, 1]]),
        "s2": (1, lambda x: [[1, 0, x, 0], [0, 1, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1]]),
        "s1s2": (2, lambda x, y: [[1, 0, 0, 0], [x, 1, 0, y], [0, 0, 1, -x], [0, 0, 0, 1]]),
        "s2s1": (2, lambda x, y: [[1, 0, x, y], [0, 1, y, 0], [0, 0, 1, 0], [0, 0, 0, 1]]),
        "s1s2s1": (3, lambda x, y, z: [[1, 0, 0, y], [x, 1, y, x * y + z], [0, 0, 1, -x], [0, 0, 0, 1]]),
        "s2s1s2": (3, lambda x, y, z: [[1, 0, x, y], [0, 1, y, z], [0, 0, 1, 0], [0, 0, 0, 1]]),
        "s1s2s1s2": (
            4,
            lambda w, x, y, z: [[1, 0, x, y], [w, 1, w * x + y, w * y + z], [0, 0, 1, -w], [0, 0, 0, 1]],
        ),
    }
    return table[word]


def bruhat_frames(p: int) -> list[tuple[str, tuple[int, ...], Matrix]]:
    """Every displayed frame ``n(params) * s`` of the decomposition of K^H into I-cosets."""
    out = []
    for word in WEYL_WORDS:
        k, build = _cell_unipotents(word)
        for params in itertools.product(range(p), repeat=k):
            out.append((word, params, Matrix(build(*params)) @ weyl(word)))
    return out


def _mod_p_rows(g: Matrix, p: int) -> list[list[int]]:
    return [[e.numerator * pow(e.denominator, -1, p) % p for e in row] for row in g.to_F().rows]


def _matmul_mod(a, b, p):
    return [[sum(a[i][k] * b[k][j] for k in range(4)) % p for j in range(4)] for i in range(4)]


def _iwahori_pattern_mod(m, p) -> bool:
    return all(m[i][j] % p == 0 for i, j in IWAHORI_ZERO_PATTERN)


class BruhatClassifier:
    """Locate ``k in K^H`` in exactly one displayed frame coset, working mod p."""

    def __init__(self, p: int):
        self.p = p
        self.frames = []
        for word, params, f in bruhat_frames(p):
            self.frames.append((word, params, _mod_p_rows(h_inverse(f), p)))

    def classify(self, k: Matrix) -> list[tuple[str, tuple[int, ...]]]:
        if not in_KH(k, self.p):
            raise ParameterError("element is not in K^H")
        km = _mod_p_rows(k, self.p)
        return [(w, prm) for w, prm, finv in self.frames if _iwahori_pattern_mod(_matmul_mod(finv, km, self.p), self.p)]


# Finite symplectic group enumeration --------------------------------------


def _pair(u: Sequence[int], v: Sequence[int], p: int) -> int:
    return (u[0] * v[2] + u[1] * v[3] - u[2] * v[0] - u[3] * v[1]) % p


def gsp4_mod_p_count(q: int) -> tuple[int, int]:
    """Enumerate GSp4(F_q) by similitude bases; return (|G|, |Iwahori image|)."""
    vecs = [v for v in itertools.product(range(q), repeat=4) if any(v)]
    total = 0
    borel = 0
    for mu in range(1, q):
        for v1 in vecs:
            c2 = [v for v in vecs if _pair(v1, v, q) == 0]
            c3 = [v for v in vecs if _pair(v1, v, q) == mu]
            c4base = c2
            for v2 in c2:
                if any(all((t * a - b) % q == 0 for a, b in zip(v1, v2)) for t in range(q)):
                    continue
                for v3 in c3:
                    if _pair(v2, v3, q) != 0:
                        continue
                    for v4 in c4base:
                        if _pair(v2, v4, q) != mu or _pair(v3, v4, q) != 0:
                            continue
                        total += 1
                        cols = (v1, v2, v3, v4)
                        if all(cols[j][i] == 0 for i, j in IWAHORI_ZERO_PATTERN):
                            borel += 1
    return total, borel


# Matrix identity suite -----------------------------------------------------


@dataclass(frozen=True)
class IdentityResult:
    name: str
    params: tuple
    ok: bool


def collapse_witness(fd: FieldData, w, m: int) -> tuple[Matrix, Matrix]:
    """``(r, k)`` with ``r h(l,m) = h(l,m) W_w s1 k`` for every l."""
    from .padicbase import beta_wm

    beta, _ = beta_wm(fd, w, m)
    if beta == 0:
        raise ParameterError("collapse witness needs a nonzero beta")
    pm = Fraction(fd.p) ** m
    y, x = pm, pm * fd.b / 2 + fd.c * Fraction(w)
    g = Matrix([[x + fd.b * y / 2, fd.c * y], [-fd.a * y, x - fd.b * y / 2]])
    mid = fd.b * pm + fd.c * Fraction(w)
    k = Matrix([[-beta, 0, 0, 0], [mid, fd.c, 0, 0], [0, 0, -fd.c, mid], [0, 0, 0, beta]])
    return embed_levi(g), k


def split_swap_witness(fd: FieldData) -> tuple[Matrix, Matrix]:
    """``(r, k)`` with ``r h(l,0) W_- s1 s2 = h(l,0) W_+ diag(1,p,p,1) s2 k`` (split case)."""
    if not fd.split:
        raise ParameterError("split case only")
    rd, p = fd.sqrt_d, fd.p
    x = rd / 2 + p
    g = Matrix([[x + fd.b / 2, fd.c], [-fd.a, x - fd.b / 2]])
    k = Matrix([[rd / fd.c, 0, 0, -1], [0, -rd / fd.c, 1, 0], [0, p, fd.c, 0], [-p, 0, 0, -fd.c]])
    return embed_levi(g), k


def matrix_identity_suite(fd: FieldData, lrange=range(-2, 4), mrange=range(0, 4)) -> list[IdentityResult]:
    from .padicbase import beta_wm

    p = fd.p
    out: list[IdentityResult] = []
    e0 = eta0(p)
    for w in range(1, p):
        wi = Fraction(1, w)
        out.append(
            IdentityResult("lower_unipotent_w", (w,), W_w(w) == u1(wi) @ S1 @ Matrix.diag(w, -wi, wi, -w) @ u1(wi))
        )
        out.append(
            IdentityResult("lower_unipotent_y", (w,), u2(w) == upper13(wi) @ S2 @ Matrix.diag(-w, 1, -wi, 1) @ upper13(wi))
        )
    sign_a = Matrix.diag(1, -1, -1, 1)
    sign_b = Matrix.diag(1, 1, -1, -1)
    sign_c = Matrix.diag(-1, -1, 1, 1)
    for l in lrange:
        for m in mrange:
            h = h_lm(p, l, m)
            out.append(
                IdentityResult(
                    "eta0_s2s1", (l, m), h @ weyl("s2s1") @ e0 == h_lm(p, l - 1, m + 1) @ weyl("s1s2s1") @ sign_a
                )
            )
            out.append(IdentityResult("eta0_s2s1s2", (l, m), h @ weyl("s2s1s2") @ e0 == h_lm(p, l + 1, m) @ sign_b))
            out.append(
                IdentityResult("eta0_shift", (l, m), h @ e0 == center(p) @ h_lm(p, l - 1, m) @ weyl("s2s1s2") @ sign_c)
            )
            for w in range(p):
                out.append(
                    IdentityResult(
                        "eta0_W_s1s2s1s2",
                        (l, m, w),
                        h @ W_w(w) @ weyl("s1s2s1s2") @ e0 == h_lm(p, l + 1, m) @ W_w(w) @ S1 @ sign_b,
                    )
                )
            hl = lift_to_L(fd, h)
            out.append(IdentityResult("eta_h_commute", (l, m), eta(fd) @ hl == hl @ eta_m(fd, m)))
    for m in mrange:
        for w in range(p):
            beta, unit = beta_wm(fd, w, m)
            if beta == 0:
                out.append(IdentityResult("collapse_k_in_I", (m, w), not unit))
                continue
            r, k = collapse_witness(fd, w, m)
            kin = in_iwahori(k, p)
            conj_ok = all(in_iwahori(h_inverse(weyl(s)) @ k @ weyl(s), p) for s in WEYL_ONE) if kin else True
            out.append(IdentityResult("collapse_k_in_I", (m, w), kin == unit and conj_ok))
            for l in lrange:
                h = h_lm(p, l, m)
                out.append(IdentityResult("collapse_witness", (l, m, w), r @ h == h @ W_w(w) @ S1 @ k))
    if fd.split:
        r, k = split_swap_witness(fd)
        wp, wm = fd.split_roots
        mid = Matrix.diag(1, p, p, 1)
        out.append(IdentityResult("split_swap_k_in_I", (), in_iwahori(k, p)))
        for l in lrange:
            h = h_lm(p, l, 0)
            out.append(
                IdentityResult("split_swap", (l,), r @ h @ W_w(wm) @ S1 @ S2 == h @ W_w(wp) @ mid @ S2 @ k)
            )
            lhs = h @ W_w(wp) @ S1 @ S2 @ e0
            rhs = h @ W_w(wp) @ mid @ S2
            out.append(IdentityResult("split_eta0_coset", (l,), in_iwahori(h_inverse(rhs) @ lhs, p)))
    return out


# Random sampling -----------------------------------------------------------


def sample_iwahori(p: int, rng, steps: int = 6) -> Matrix:
    """A random element of I as a product of its standard generators."""

    def small(scale=1):
        return Fraction(rng.randrange(-2 * p, 2 * p + 1) * scale, rng.choice([1, 1 + p, 1 - p]))

    def unit():
        while True:
            x = small()
            if fval(x, p) == 0:
                return x

    t1, t2, mu = unit(), unit(), unit()
    k = Matrix.diag(t1, t2, mu / t1, mu / t2)
    lower_siegel = lambda y11, y12, y22: Matrix(
        [[1, 0, 0, 0], [0, 1, 0, 0], [y11, y12, 1, 0], [y12, y22, 0, 1]]
    )
    makers = [
        lambda: u1(small(p)),
        lambda: u2(small(p)),
        lambda: upper13(small()),
        lambda: U_X(small(), small(), small()),
        lambda: W_w(small()),
        lambda: lower_siegel(small(p), small(p), small(p)),
    ]
    for _ in range(steps):
        k = k @ rng.choice(makers)()
    return k
