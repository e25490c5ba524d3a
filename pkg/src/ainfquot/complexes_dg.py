"""Complexes of quiver representations as a differential graded category.

Supports finite acyclic quivers with at most one arrow between two
vertices that is either absent or a single edge — enough for the
two-vertex one-arrow quiver and for the semisimple (arrowless) case.
Everything is exact linear algebra over the configured field.

Matrices act on the right of row vectors; composition of module maps
and chain maps is diagrammatic (first map, then second).
"""

from __future__ import annotations

from dataclasses import dataclass

from .ainf_core import AInfCategory
from .exact_linalg import Field, Matrix, kernel_basis, rank, row_space_coordinates, solve_linear
from .graded_quiver import BasisMorphism, fs_add_into, fs_scale


class QuiverAlgebra:
    """Path algebra data of a finite acyclic quiver."""

    def __init__(self, vertices, arrows):
        self.vertices = tuple(vertices)
        self.arrows = tuple(tuple(a) for a in arrows)  # (source, target)


A2 = QuiverAlgebra(("1", "2"), [("1", "2")])
POINT = QuiverAlgebra(("*",), [])

# "Algebra" in the public interface
Algebra = QuiverAlgebra


def zero_matrix(field, rows, cols):
    return [[field.zero] * cols for _ in range(rows)]


def identity_matrix(field, n):
    m = zero_matrix(field, n, n)
    for i in range(n):
        m[i][i] = field.one
    return m


def mat_mul(field, a, b):
    if not a or not b:
        return [[field.zero] * (len(b[0]) if b else 0) for _ in range(len(a))]
    rows, inner, cols = len(a), len(b), len(b[0])
    out = zero_matrix(field, rows, cols)
    for i in range(rows):
        for k in range(inner):
            x = a[i][k]
            if field.is_zero(x):
                continue
            for j in range(cols):
                out[i][j] = field.add(out[i][j], field.mul(x, b[k][j]))
    return out


def mat_add(field, a, b, ca=1, cb=1):
    ca, cb = field.coerce(ca), field.coerce(cb)
    return [
        [
            field.add(field.mul(ca, a[i][j]), field.mul(cb, b[i][j]))
            for j in range(len(a[0]) if a else 0)
        ]
        for i in range(len(a))
    ]


def mat_scale(field, a, c):
    c = field.coerce(c)
    return [[field.mul(c, x) for x in row] for row in a]


def mat_is_zero(field, a):
    return all(field.is_zero(x) for row in a for x in row)


@dataclass
class ModuleObject:
    """Finite-dimensional representation of the quiver."""

    dims: dict  # vertex -> int
    maps: dict  # (source, target) -> matrix dims[source] x dims[target]

    def dim(self, v):
        return self.dims.get(v, 0)

    def arrow(self, field, arrow):
        s, t = arrow
        m = self.maps.get(arrow)
        if m is None:
            return zero_matrix(field, self.dim(s), self.dim(t))
        return m

    def total_dim(self):
        return sum(self.dims.values())


def zero_module(alg):
    return ModuleObject({v: 0 for v in alg.vertices}, {})


def module_hom_basis(field: Field, alg: QuiverAlgebra, m: ModuleObject, n: ModuleObject):
    """Basis of representation morphisms m -> n (deterministic order)."""
    # unknown layout: per vertex, row-major entries of dims_m[v] x dims_n[v]
    layout = []
    offset = 0
    for v in alg.vertices:
        size = m.dim(v) * n.dim(v)
        layout.append((v, offset, size))
        offset += size
    total = offset
    if total == 0:
        return []
    rows = []
    for arrow in alg.arrows:
        s, t = arrow
        ma = m.arrow(field, arrow)
        na = n.arrow(field, arrow)
        # constraint: phi_s . n_arrow == m_arrow . phi_t  (entrywise)
        for i in range(m.dim(s)):
            for j in range(n.dim(t)):
                row = [field.zero] * total
                # (phi_s na)_{ij} = sum_k phi_s[i][k] na[k][j]
                for v, off, size in layout:
                    if v == s:
                        for k in range(n.dim(s)):
                            row[off + i * n.dim(s) + k] = field.add(
                                row[off + i * n.dim(s) + k], na[k][j]
                            )
                # minus (ma phi_t)_{ij} = sum_k ma[i][k] phi_t[k][j]
                for v, off, size in layout:
                    if v == t:
                        for k in range(m.dim(t)):
                            idx = off + k * n.dim(t) + j
                            row[idx] = field.sub(row[idx], ma[i][k])
                rows.append(row)
    if not rows:
        rows = [[field.zero] * total]
    a = Matrix.from_rows(field, rows)
    basis_vecs = kernel_basis(field, a)
    out = []
    for vec in basis_vecs:
        phi = {}
        for v, off, size in layout:
            dm, dn = m.dim(v), n.dim(v)
            phi[v] = [
                [vec[off + i * dn + j] for j in range(dn)] for i in range(dm)
            ]
        out.append(phi)
    return out


def module_hom_apply(field, alg, phi, psi, m, k, n):
    """Composite of module maps phi: m->k then psi: k->n."""
    return {
        v: mat_mul(field, phi.get(v, []), psi.get(v, []))
        for v in alg.vertices
    }


@dataclass
class ComplexObject:
    """Bounded complex of representations."""

    name: str
    modules: dict  # degree -> ModuleObject
    diff: dict  # degree n -> module map modules[n] -> modules[n+1] (vertex -> matrix)

    def support(self):
        return sorted(n for n, m in self.modules.items() if m.total_dim() > 0)

    def module(self, alg, n):
        return self.modules.get(n) or zero_module(alg)

    def d(self, field, alg, n):
        mod = self.module(alg, n)
        nxt = self.module(alg, n + 1)
        dd = self.diff.get(n)
        if dd is None:
            return {v: zero_matrix(field, mod.dim(v), nxt.dim(v)) for v in alg.vertices}
        return {
            v: dd.get(v, zero_matrix(field, mod.dim(v), nxt.dim(v)))
            for v in alg.vertices
        }


def validate_complex(field, alg, x: ComplexObject):
    for n in list(x.modules):
        d0 = x.d(field, alg, n)
        d1 = x.d(field, alg, n + 1)
        for v in alg.vertices:
            if not mat_is_zero(field, mat_mul(field, d0[v], d1[v])):
                raise ValueError(f"d^2 != 0 in {x.name} at degree {n}, vertex {v}")
        mod = x.module(alg, n)
        for arrow in alg.arrows:
            s, t = arrow
            nxt = x.module(alg, n + 1)
            lhs = mat_mul(field, mod.arrow(field, arrow), x.d(field, alg, n)[t])
            rhs = mat_mul(field, x.d(field, alg, n)[s], nxt.arrow(field, arrow))
            if not mat_is_zero(field, mat_add(field, lhs, rhs, 1, -1)):
                raise ValueError(
                    f"differential not a module map in {x.name} at {n}, arrow {arrow}"
                )
    return True


def shift_complex(field, x: ComplexObject, k: int, name=None) -> ComplexObject:
    """Degree shift: new degree n holds the old degree n + k."""
    sign = -1 if k % 2 else 1
    modules = {n - k: m for n, m in x.modules.items()}
    diff = {
        n - k: {v: mat_scale(field, mat, sign) for v, mat in d.items()}
        for n, d in x.diff.items()
    }
    return ComplexObject(name or f"{x.name}[{k}]", modules, diff)


@dataclass
class ChainMap:
    """Graded map of complexes of a fixed degree (not necessarily closed)."""

    source: str
    target: str
    degree: int
    comps: dict  # n -> module map source^n -> target^{n+degree} (vertex -> matrix)


@dataclass
class QuasiIsoData:
    """Cone package for one closed degree-zero quasi-isomorphism."""

    q: ChainMap  # X -> Y
    cone: ComplexObject
    into_cone: ChainMap  # Y -> C, degree 0, closed
    onto_shift: ChainMap  # C -> X, degree 1
    off_shift: ChainMap  # X -> C, degree -1
    onto_base: ChainMap  # C -> Y, degree 0


class ComplexDGCategory(AInfCategory):
    """Differential graded category of bounded complexes."""

    def __init__(self, field: Field, alg: QuiverAlgebra, complexes, window=None, N_max=2):
        self.field = field
        self.alg = alg
        self.N_max = N_max
        self.complexes = {}
        self._basis_cache = {}
        self._explicit_window = window
        self.truncation_loss = False
        for x in complexes:
            validate_complex(field, alg, x)
            self.complexes[x.name] = x
        self._recompute_window()

    def _recompute_window(self):
        if self._explicit_window is not None:
            self.window = tuple(self._explicit_window)
            return
        lo, hi = 0, 0
        supports = {
            name: (x.support() or [0]) for name, x in self.complexes.items()
        }
        for sx in supports.values():
            for sy in supports.values():
                lo = min(lo, min(sy) - max(sx) - 1)
                hi = max(hi, max(sy) - min(sx) - 1)
        self.window = (lo, hi)

    def add_object(self, x: ComplexObject):
        validate_complex(self.field, self.alg, x)
        if x.name in self.complexes:
            raise ValueError(f"duplicate object name {x.name}")
        self.complexes[x.name] = x
        self._basis_cache.clear()
        self._recompute_window()

    def objects(self):
        return tuple(self.complexes)

    # -- hom bases -------------------------------------------------------------
    def _pair_basis(self, xname, yname, sdeg):
        key = (xname, yname, sdeg)
        if key in self._basis_cache:
            return self._basis_cache[key]
        deg = sdeg + 1
        x = self.complexes[xname]
        y = self.complexes[yname]
        atoms = []
        data = []
        for n in x.support():
            mx = x.module(self.alg, n)
            my = y.module(self.alg, n + deg)
            if my.total_dim() == 0:
                continue
            for idx, phi in enumerate(
                module_hom_basis(self.field, self.alg, mx, my)
            ):
                label = f"{xname}->{yname}@{deg}#{n}.{idx}"
                atoms.append(BasisMorphism(label, xname, yname, sdeg))
                data.append((n, phi))
        entry = (tuple(atoms), tuple(data))
        self._basis_cache[key] = entry
        return entry

    def hom_basis(self, source, target, sdegree):
        return self._pair_basis(source, target, sdegree)[0]

    def atom_data(self, atom: BasisMorphism):
        atoms, data = self._pair_basis(atom.source, atom.target, atom.sdegree)
        return data[atoms.index(atom)]

    def graded_map_of(self, atom: BasisMorphism):
        """Full graded-map components of a basis atom."""
        n, phi = self.atom_data(atom)
        return {n: phi}

    # -- coordinates ------------------------------------------------------------
    def _flatten(self, xname, yname, deg, comps):
        x = self.complexes[xname]
        y = self.complexes[yname]
        vec = []
        for n in x.support():
            mx = x.module(self.alg, n)
            my = y.module(self.alg, n + deg)
            phi = comps.get(n, {})
            for v in self.alg.vertices:
                mat = phi.get(v)
                for i in range(mx.dim(v)):
                    for j in range(my.dim(v)):
                        vec.append(
                            mat[i][j] if mat else self.field.zero
                        )
        return vec

    def coordinates(self, xname, yname, deg, comps):
        """Formal sum of basis atoms representing a graded map."""
        sdeg = deg - 1
        lo, hi = self.window
        if sdeg < lo or sdeg > hi:
            if any(
                not mat_is_zero(self.field, m)
                for phi in comps.values()
                for m in phi.values()
            ):
                self.truncation_loss = True
            return {}
        atoms, data = self._pair_basis(xname, yname, sdeg)
        target_vec = self._flatten(xname, yname, deg, comps)
        if not atoms:
            if any(not self.field.is_zero(c) for c in target_vec):
                raise ValueError("graded map outside the hom space")
            return {}
        basis_vecs = [
            self._flatten(xname, yname, deg, {n: phi}) for (n, phi) in data
        ]
        coeffs = row_space_coordinates(self.field, basis_vecs, target_vec)
        if coeffs is None:
            raise ValueError("graded map not representable in the hom basis")
        out = {}
        for atom, c in zip(atoms, coeffs):
            if not self.field.is_zero(c):
                out[atom] = c
        return out

    # -- structure operations ----------------------------------------------------
    def b(self, atoms):
        atoms = tuple(atoms)
        if len(atoms) == 1:
            return self._b1(atoms[0])
        if len(atoms) == 2:
            return self._b2(atoms[0], atoms[1])
        return {}

    def _b1(self, atom):
        """Hom-complex differential in shifted grading."""
        n, phi = self.atom_data(atom)
        deg = atom.sdegree + 1
        x = self.complexes[atom.source]
        y = self.complexes[atom.target]
        out = {}
        # phi then d_Y
        dy = y.d(self.field, self.alg, n + deg)
        out[n] = {
            v: mat_mul(self.field, phi[v], dy[v]) for v in self.alg.vertices
        }
        # minus (-1)^deg d_X then phi (lands at position n - 1)
        dx = x.d(self.field, self.alg, n - 1)
        sign = self.field.sign_pow(deg + 1)  # -(-1)^deg
        prev = {
            v: mat_scale(self.field, mat_mul(self.field, dx[v], phi[v]), sign)
            for v in self.alg.vertices
        }
        if (n - 1) in out:
            out[n - 1] = {
                v: mat_add(self.field, out[n - 1][v], prev[v])
                for v in self.alg.vertices
            }
        else:
            out[n - 1] = prev
        return self.coordinates(atom.source, atom.target, deg + 1, out)

    def _b2(self, a, b):
        """Shifted composition: diagrammatic product with one sign."""
        if a.target != b.source:
            raise ValueError("non-composable atoms")
        na, pa = self.atom_data(a)
        nb, pb = self.atom_data(b)
        dega = a.sdegree + 1
        degb = b.sdegree + 1
        if nb != na + dega:
            return {}
        comps = {
            na: {
                v: mat_mul(self.field, pa[v], pb[v])
                for v in self.alg.vertices
            }
        }
        sign = self.field.sign_pow(degb)
        raw = self.coordinates(a.source, b.target, dega + degb, comps)
        return fs_scale(self.field, raw, sign)

    def unit0(self, obj):
        x = self.complexes[obj]
        comps = {}
        for n in x.support():
            mod = x.module(self.alg, n)
            comps[n] = {
                v: identity_matrix(self.field, mod.dim(v)) for v in self.alg.vertices
            }
        return self.coordinates(obj, obj, 0, comps)

    # -- chain maps as elements ----------------------------------------------------
    def chain_map_element(self, cm: ChainMap):
        return self.coordinates(cm.source, cm.target, cm.degree, cm.comps)


def build_dg_category(field, alg, complexes, window=None, N_max=2) -> ComplexDGCategory:
    return ComplexDGCategory(field, alg, complexes, window=window, N_max=N_max)


# ---------------------------------------------------------------------------
# acyclicity, cones
# ---------------------------------------------------------------------------


def is_acyclic(field, alg, x: ComplexObject) -> bool:
    """True when the complex of vector spaces at each vertex is exact."""
    supp = x.support()
    if not supp:
        return True
    lo, hi = min(supp), max(supp)
    for v in alg.vertices:
        for n in range(lo - 1, hi + 2):
            dim = x.module(alg, n).dim(v)
            d_in = Matrix.from_rows(
                field, x.d(field, alg, n - 1)[v] or [[]]
            ) if x.module(alg, n - 1).dim(v) else None
            d_out = Matrix.from_rows(
                field, x.d(field, alg, n)[v] or [[]]
            ) if dim and x.module(alg, n + 1).dim(v) else None
            rk_in = rank(field, d_in) if d_in and d_in.cols else 0
            rk_out = rank(field, d_out) if d_out and d_out.cols else 0
            # kernel dim of d_out
            ker = dim - rk_out
            if ker != rk_in:
                return False
    return True


def cone_maps(field, alg, q: ChainMap, x: ComplexObject, y: ComplexObject, name=None) -> QuasiIsoData:
    """Mapping cone of a closed degree-zero chain map, with the four
    canonical graded maps in and out of it."""
    if q.degree != 0:
        raise ValueError("cone of a degree-zero map only")
    name = name or f"Cone({q.source}->{q.target})"
    degrees = set(y.support()) | {n - 1 for n in x.support()}
    modules = {}
    diff = {}
    for n in sorted(degrees):
        ym = y.module(alg, n)
        xm = x.module(alg, n + 1)
        dims = {v: ym.dim(v) + xm.dim(v) for v in alg.vertices}
        maps = {}
        for arrow in alg.arrows:
            s, t = arrow
            ya = ym.arrow(field, arrow)
            xa = xm.arrow(field, arrow)
            block = zero_matrix(field, dims[s], dims[t])
            for i in range(ym.dim(s)):
                for j in range(ym.dim(t)):
                    block[i][j] = ya[i][j]
            for i in range(xm.dim(s)):
                for j in range(xm.dim(t)):
                    block[ym.dim(s) + i][ym.dim(t) + j] = xa[i][j]
            maps[arrow] = block
        modules[n] = ModuleObject(dims, maps)
    for n in sorted(degrees):
        ym, xm = y.module(alg, n), x.module(alg, n + 1)
        ym1, xm1 = y.module(alg, n + 1), x.module(alg, n + 2)
        dmat = {}
        dy = y.d(field, alg, n)
        dx = x.d(field, alg, n + 1)
        qmat = q.comps.get(n + 1, {})
        for v in alg.vertices:
            rows = ym.dim(v) + xm.dim(v)
            cols = ym1.dim(v) + xm1.dim(v)
            m = zero_matrix(field, rows, cols)
            for i in range(ym.dim(v)):
                for j in range(ym1.dim(v)):
                    m[i][j] = dy[v][i][j]
            qv = qmat.get(v)
            for i in range(xm.dim(v)):
                for j in range(ym1.dim(v)):
                    if qv:
                        m[ym.dim(v) + i][j] = qv[i][j]
            for i in range(xm.dim(v)):
                for j in range(xm1.dim(v)):
                    m[ym.dim(v) + i][ym1.dim(v) + j] = field.neg(dx[v][i][j])
            dmat[v] = m
        diff[n] = dmat
    cone = ComplexObject(name, modules, diff)
    validate_complex(field, alg, cone)

    def block_map(src, tgt, deg, builder):
        comps = {}
        for n in src.support():
            sm = src.module(alg, n)
            tm = tgt.module(alg, n + deg)
            if tm.total_dim() == 0:
                continue
            comps[n] = {
                v: builder(n, v, sm.dim(v), tm.dim(v)) for v in alg.vertices
            }
        return comps

    # into_cone: Y -> C, y |-> (y, 0)
    def b_into(n, v, sd, td):
        m = zero_matrix(field, sd, td)
        for i in range(sd):
            m[i][i] = field.one
        return m

    # onto_shift: C -> X degree 1, (y, x) |-> x
    def b_onto_shift(n, v, sd, td):
        m = zero_matrix(field, sd, td)
        ydim = y.module(alg, n).dim(v)
        for i in range(sd - ydim):
            m[ydim + i][i] = field.one
        return m

    # off_shift: X -> C degree -1, x |-> (0, x)
    def b_off_shift(n, v, sd, td):
        m = zero_matrix(field, sd, td)
        ydim = y.module(alg, n - 1).dim(v)
        for i in range(sd):
            m[i][ydim + i] = field.one
        return m

    # onto_base: C -> Y degree 0, (y, x) |-> y
    def b_onto_base(n, v, sd, td):
        m = zero_matrix(field, sd, td)
        for i in range(td):
            m[i][i] = field.one
        return m

    return QuasiIsoData(
        q=q,
        cone=cone,
        into_cone=ChainMap(y.name, name, 0, block_map(y, cone, 0, b_into)),
        onto_shift=ChainMap(name, x.name, 1, block_map(cone, x, 1, b_onto_shift)),
        off_shift=ChainMap(x.name, name, -1, block_map(x, cone, -1, b_off_shift)),
        onto_base=ChainMap(name, y.name, 0, block_map(cone, y, 0, b_onto_base)),
    )


# ---------------------------------------------------------------------------
# injectives and resolutions (two-vertex and arrowless quivers)
# ---------------------------------------------------------------------------


def module_is_injective(field, alg, m: ModuleObject) -> bool:
    """For the supported quivers: every arrow map must be surjective."""
    for arrow in alg.arrows:
        s, t = arrow
        mat = m.arrow(field, arrow)
        if m.dim(t) and rank(field, Matrix.from_rows(field, mat or [[]])) < m.dim(t):
            return False
        if m.dim(t) and m.dim(s) == 0:
            return False
    return True


def complex_is_injective(field, alg, x: ComplexObject) -> bool:
    return all(
        module_is_injective(field, alg, x.module(alg, n)) for n in x.support()
    )


def injective_hull(field, alg, m: ModuleObject):
    """Embedding of a representation into an injective one, with cokernel.

    Returns (hull, embedding, cokernel, projection) where embedding and
    projection are vertexwise matrices.
    """
    if not alg.arrows:
        emb = {v: identity_matrix(field, m.dim(v)) for v in alg.vertices}
        cok = zero_module(alg)
        proj = {v: zero_matrix(field, m.dim(v), 0) for v in alg.vertices}
        return m, emb, cok, proj
    if len(alg.vertices) != 2 or len(alg.arrows) != 1:
        raise NotImplementedError("injective hulls only for two-vertex quivers")
    (s, t) = alg.arrows[0]
    phi = m.arrow(field, alg.arrows[0])
    ker = kernel_basis(field, Matrix.from_rows(field, phi or [[field.zero] * m.dim(t) for _ in range(m.dim(s))]) if m.dim(s) else Matrix(field, 0, m.dim(t)))
    if m.dim(s) == 0:
        ker = []
    kdim = len(ker)
    # hull: at s, ker (+) V_t; at t, V_t; arrow = projection
    hull_dims = {s: kdim + m.dim(t), t: m.dim(t)}
    arrow_mat = zero_matrix(field, hull_dims[s], hull_dims[t])
    for i in range(m.dim(t)):
        arrow_mat[kdim + i][i] = field.one
    hull = ModuleObject(hull_dims, {alg.arrows[0]: arrow_mat})
    # projection of V_s onto ker along a complement: rows = ker basis + pivots
    # choose complement columns deterministically via solve
    emb_s = zero_matrix(field, m.dim(s), hull_dims[s])
    if m.dim(s):
        # write each standard basis vector e_i = sum a_j ker_j + w with w in
        # a complement; the kernel coordinates give the projection
        # complement: rows of phi-pivot preimages; use joint solve
        span = [list(kv) for kv in ker]
        # extend ker to a basis of V_s deterministically
        ext = _extend_to_basis(field, span, m.dim(s))
        full_mat = Matrix.from_rows(field, span + ext).transpose()
        for i in range(m.dim(s)):
            e = [field.zero] * m.dim(s)
            e[i] = field.one
            coords = solve_linear(field, full_mat, e)
            for j in range(kdim):
                emb_s[i][j] = coords[j]
        pphi = phi or []
        for i in range(m.dim(s)):
            for j in range(m.dim(t)):
                emb_s[i][kdim + j] = pphi[i][j]
    emb_t = identity_matrix(field, m.dim(t))
    emb = {s: emb_s, t: emb_t}
    cok, proj = _cokernel(field, alg, m, hull, emb)
    return hull, emb, cok, proj


def _extend_to_basis(field, vectors, dim):
    """Deterministically extend independent rows to a basis of k^dim."""
    ext = []
    current = [list(v) for v in vectors]
    for i in range(dim):
        e = [field.zero] * dim
        e[i] = field.one
        trial = current + ext + [e]
        if rank(field, Matrix.from_rows(field, trial)) == len(trial):
            ext.append(e)
        if len(vectors) + len(ext) == dim:
            break
    return ext


def _cokernel(field, alg, m, hull, emb):
    """Cokernel representation of an injective vertexwise embedding."""
    cok_dims = {}
    cok_proj = {}
    comp_rows = {}
    for v in alg.vertices:
        img = [row[:] for row in emb[v]] if m.dim(v) else []
        comp = _extend_to_basis(field, img, hull.dim(v))
        comp_rows[v] = comp
        cok_dims[v] = len(comp)
        # projection: coordinates in img+comp basis, keep comp part
        full = img + comp
        proj = zero_matrix(field, hull.dim(v), len(comp))
        if full:
            fm = Matrix.from_rows(field, full).transpose()
            for i in range(hull.dim(v)):
                e = [field.zero] * hull.dim(v)
                e[i] = field.one
                coords = solve_linear(field, fm, e)
                for j in range(len(comp)):
                    proj[i][j] = coords[len(img) + j]
        cok_proj[v] = proj
    cok_maps = {}
    for arrow in alg.arrows:
        s, t = arrow
        # induced arrow: lift comp basis at s, apply hull arrow, project at t
        mat = zero_matrix(field, cok_dims[s], cok_dims[t])
        hullarrow = hull.arrow(field, arrow)
        for i, vrow in enumerate(comp_rows[s]):
            out = [field.zero] * hull.dim(t)
            for a, x in enumerate(vrow):
                if field.is_zero(x):
                    continue
                for bcol in range(hull.dim(t)):
                    out[bcol] = field.add(out[bcol], field.mul(x, hullarrow[a][bcol]))
            projected = [field.zero] * cok_dims[t]
            pm = cok_proj[t]
            for a, x in enumerate(out):
                if field.is_zero(x):
                    continue
                for bcol in range(cok_dims[t]):
                    projected[bcol] = field.add(
                        projected[bcol], field.mul(x, pm[a][bcol])
                    )
            mat[i] = projected
        cok_maps[arrow] = mat
    return ModuleObject(cok_dims, cok_maps), cok_proj


def stalk_complex(field, alg, name, module, degree=0) -> ComplexObject:
    return ComplexObject(name, {degree: module}, {})


def injective_resolution(field, alg, x: ComplexObject, name=None):
    """A quasi-isomorphism from the complex into a complex of injectives.

    Handles: complexes that are already injective (identity), acyclic
    complexes (map to zero), and one-module stalk complexes (two-step
    resolution from the injective hull).  Returns (resolved, chain map,
    already_injective flag).
    """
    name = name or f"{x.name}.res"
    if complex_is_injective(field, alg, x):
        comps = {}
        for n in x.support():
            mod = x.module(alg, n)
            comps[n] = {v: identity_matrix(field, mod.dim(v)) for v in alg.vertices}
        return x, ChainMap(x.name, x.name, 0, comps), True
    if is_acyclic(field, alg, x):
        zero = ComplexObject(name, {}, {})
        return zero, ChainMap(x.name, name, 0, {}), False
    supp = x.support()
    if len(supp) == 1:
        n0 = supp[0]
        m = x.module(alg, n0)
        hull, emb, cok, proj = injective_hull(field, alg, m)
        modules = {n0: hull}
        diff = {}
        if cok.total_dim():
            modules[n0 + 1] = cok
            diff[n0] = proj
        res = ComplexObject(name, modules, diff)
        validate_complex(field, alg, res)
        return res, ChainMap(x.name, name, 0, {n0: emb}), False
    raise NotImplementedError(
        "resolutions are implemented for injective, acyclic, and stalk complexes"
    )


# ---------------------------------------------------------------------------
# quotient-level inverse certificates for quasi-isomorphisms
# ---------------------------------------------------------------------------


def invert_qis_in_quotient(quot, dg: ComplexDGCategory, data: QuasiIsoData):
    """Inverse certificate for a quasi-isomorphism inside the quotient.

    Returns a dict with elements r, p, w, v (formal sums of strings) and
    the four residuals of the certificate equations; all residuals are
    empty exactly when the certificate holds.
    """
    from .tensor_world import TensorString
    from .graded_quiver import fs_combine, fs_sub

    field = quot.field

    def elem(cm: ChainMap):
        return dg.chain_map_element(cm)

    def one_string(fsum):
        return {TensorString((a,)): c for a, c in fsum.items()}

    def two_string(f1, f2, sign=1):
        acc = {}
        for a, ca in f1.items():
            for b, cb in f2.items():
                fs_add_into(
                    field,
                    acc,
                    TensorString((a, b)),
                    field.mul(field.coerce(sign), field.mul(ca, cb)),
                )
        return acc

    r = one_string(elem(data.q))
    p = two_string(elem(data.into_cone), elem(data.onto_shift))
    w = two_string(elem(data.off_shift), elem(data.onto_shift))
    v = two_string(elem(data.into_cone), elem(data.onto_base), sign=-1)

    def b1(elt):
        acc = {}
        for s, c in elt.items():
            for out, c2 in quot.b((s,)).items():
                fs_add_into(field, acc, out, field.mul(c, c2))
        return acc

    def b2(e1, e2):
        acc = {}
        for s1, c1 in e1.items():
            for s2, c2 in e2.items():
                for out, c3 in quot.b((s1, s2)).items():
                    fs_add_into(
                        field, acc, out, field.mul(field.mul(c1, c2), c3)
                    )
        return acc

    unit_x = one_string(dg.unit0(data.q.source))
    unit_y = one_string(dg.unit0(data.q.target))

    residuals = {
        "r_closed": b1(r),
        "p_closed": b1(p),
        "w_splits": fs_sub(field, b1(w), fs_sub(field, b2(r, p), unit_x)),
        "v_splits": fs_sub(field, b1(v), fs_sub(field, b2(p, r), unit_y)),
    }
    return {"r": r, "p": p, "w": w, "v": v, "residuals": residuals}
