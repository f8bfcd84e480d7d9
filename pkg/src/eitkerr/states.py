"""Multi-mode states in two representations.

``CoherentSuperposition`` is exact: a finite sum of products of coherent
states, manipulated with the overlap <a|b> = exp(-|a|^2/2 - |b|^2/2 + a* b).
``FockVector`` is a dense amplitude tensor on a truncated photon-number grid
and serves as the independent numerical check of the coherent algebra.
"""

from __future__ import annotations

import csv
import io
import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.special import gammainc

from .errors import BasisMismatchError, CutoffError, PreconditionError

AMP_TOL = 1e-12
TAIL_TOL = 1e-12
NORM_TOL = 1e-8
SPAN_TOL = 1e-8
PHASE_TOL = 1e-9
EIG_FLOOR = 1e-14


def coherent_overlap(a, b):
    """<a|b> for coherent states; broadcasts over arrays."""
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    return np.exp(-0.5 * abs(a) ** 2 - 0.5 * abs(b) ** 2 + np.conj(a) * b)[()]


def _overlap_matrix(amps_a, amps_b):
    # sum the exponents over modes before exponentiating
    a = amps_a[:, None, :]
    b = amps_b[None, :, :]
    expo = -0.5 * abs(a) ** 2 - 0.5 * abs(b) ** 2 + np.conj(a) * b
    return np.exp(expo.sum(axis=-1))


def _unique_rows(rows, tol=AMP_TOL):
    """Group rows equal within ``tol``; return (representatives, index per row)."""
    reps, index = [], np.empty(len(rows), dtype=int)
    for i, row in enumerate(rows):
        for k, rep in enumerate(reps):
            if np.all(abs(row - rep) <= tol):
                index[i] = k
                break
        else:
            index[i] = len(reps)
            reps.append(row)
    return np.array(reps, dtype=complex).reshape(len(reps), -1), index


class CoherentSuperposition:
    """sum_t coeffs[t] |amps[t, 0]> x |amps[t, 1]> x ...

    Terms whose amplitudes agree within AMP_TOL are merged on construction.
    """

    def __init__(self, coeffs, amps):
        coeffs = np.atleast_1d(np.asarray(coeffs, dtype=complex))
        amps = np.asarray(amps, dtype=complex)
        if amps.ndim == 1:
            amps = amps[:, None]
        if amps.shape[0] != coeffs.shape[0]:
            raise ValueError("need one amplitude row per coefficient")
        reps, index = _unique_rows(amps)
        merged = np.zeros(len(reps), dtype=complex)
        np.add.at(merged, index, coeffs)
        keep = merged != 0
        if not np.any(keep):
            raise ValueError("state has no non-zero terms")
        self.coeffs = merged[keep]
        self.amps = reps[keep]
        self.coeffs.setflags(write=False)
        self.amps.setflags(write=False)

    @classmethod
    def from_terms(cls, terms):
        terms = list(terms)
        return cls([t[0] for t in terms], [list(t[1:]) for t in terms])

    @classmethod
    def coherent(cls, *amps):
        return cls([1.0], [list(amps)])

    @property
    def n_modes(self) -> int:
        return self.amps.shape[1]

    @property
    def terms(self):
        return [(c, *row) for c, row in zip(self.coeffs, self.amps)]

    def __len__(self):
        return len(self.coeffs)

    def __repr__(self):
        parts = ", ".join(
            f"{c:.4g}|" + ",".join(f"{a:.4g}" for a in row) + ">"
            for c, row in zip(self.coeffs, self.amps))
        return f"CoherentSuperposition({parts})"

    def inner(self, other: CoherentSuperposition) -> complex:
        """<self|other>."""
        if other.n_modes != self.n_modes:
            raise ValueError("mode count mismatch")
        gram = _overlap_matrix(self.amps, other.amps)
        return complex(np.conj(self.coeffs) @ gram @ other.coeffs)

    def norm_sq(self) -> float:
        return self.inner(self).real

    def is_normalized(self, tol=1e-10) -> bool:
        return abs(self.norm_sq() - 1.0) <= tol

    def normalized(self) -> CoherentSuperposition:
        return self.scaled(1.0 / math.sqrt(self.norm_sq()))

    def scaled(self, factor) -> CoherentSuperposition:
        return CoherentSuperposition(self.coeffs * factor, self.amps)

    def rescaled(self, factors) -> CoherentSuperposition:
        """Multiply every coherent amplitude of mode m by factors[m]."""
        factors = np.asarray(factors, dtype=complex)
        return CoherentSuperposition(self.coeffs, self.amps * factors[None, :])

    def tensor(self, other: CoherentSuperposition) -> CoherentSuperposition:
        coeffs = np.outer(self.coeffs, other.coeffs).ravel()
        left = np.repeat(self.amps, len(other), axis=0)
        right = np.tile(other.amps, (len(self), 1))
        return CoherentSuperposition(coeffs, np.hstack([left, right]))

    def permuted(self, order) -> CoherentSuperposition:
        return CoherentSuperposition(self.coeffs, self.amps[:, list(order)])

    def __add__(self, other):
        return CoherentSuperposition(np.concatenate([self.coeffs, other.coeffs]),
                                     np.vstack([self.amps, other.amps]))

    def __mul__(self, factor):
        return self.scaled(factor)

    __rmul__ = __mul__


@dataclass(frozen=True)
class FockVector:
    amps: np.ndarray
    tail_mass: float = 0.0

    @property
    def cutoff(self) -> int:
        return self.amps.shape[0]

    @property
    def n_modes(self) -> int:
        return self.amps.ndim

    def norm_sq(self) -> float:
        return float(np.vdot(self.amps, self.amps).real)

    def normalized(self) -> FockVector:
        return FockVector(self.amps / math.sqrt(self.norm_sq()), self.tail_mass)

    def inner(self, other: FockVector) -> complex:
        return complex(np.vdot(self.amps, other.amps))


def fidelity(a, b) -> float:
    """|<a|b>|^2 / (<a|a><b|b>) for two states of the same representation."""
    return abs(a.inner(b)) ** 2 / (a.norm_sq() * b.norm_sq())


def coherent_fock(amp, cutoff):
    """Fock amplitudes e^{-|a|^2/2} a^n / sqrt(n!) for n < cutoff."""
    out = np.empty(cutoff, dtype=complex)
    out[0] = math.exp(-0.5 * abs(amp) ** 2)
    for n in range(1, cutoff):
        out[n] = out[n - 1] * amp / math.sqrt(n)
    return out


def poisson_tail(amp, cutoff) -> float:
    """Probability mass of |amp> at photon numbers >= cutoff."""
    return float(gammainc(cutoff, abs(amp) ** 2))


def suggest_cutoff(state: CoherentSuperposition) -> int:
    r = float(np.max(abs(state.amps)))
    return int(math.ceil(r * r + 8 * r + 12))


def to_fock(state: CoherentSuperposition, cutoff: int | None = None) -> FockVector:
    cutoff = suggest_cutoff(state) if cutoff is None else int(cutoff)
    tails = np.array([[poisson_tail(a, cutoff) for a in row] for row in state.amps])
    tail = float(tails.sum(axis=1).max())
    if tail > TAIL_TOL:
        raise CutoffError(f"cutoff {cutoff} leaves tail mass {tail:.3e} > {TAIL_TOL}")
    m = state.n_modes
    letters = "abcdefghij"[:m]
    factors = [np.array([coherent_fock(a, cutoff) for a in state.amps[:, k]]) for k in range(m)]
    spec = "t," + ",".join(f"t{x}" for x in letters) + "->" + letters
    amps = np.einsum(spec, state.coeffs, *factors)
    return FockVector(amps, tail)


def _number_grid(cutoff, n_modes):
    return np.meshgrid(*[np.arange(cutoff)] * n_modes, indexing="ij")


def scale_modes(vec: FockVector, factors) -> FockVector:
    """Apply s^n per mode and renormalise.

    On a superposition of coherent states sharing |amplitude| in each mode
    this maps |a> to |s a> up to a common constant.
    """
    n = _number_grid(vec.cutoff, vec.n_modes)
    weights = np.ones(vec.amps.shape)
    for nk, s in zip(n, factors):
        weights = weights * float(s) ** nk
    with np.errstate(over="ignore", invalid="ignore"):
        amps = vec.amps * weights
        amps = amps / math.sqrt(float(np.vdot(amps, amps).real))
    if not np.all(np.isfinite(amps)):
        raise CutoffError("amplitude rescaling overflows the Fock grid")
    probs = abs(amps) ** 2
    edge = 0.0
    for k in range(vec.n_modes):
        marginal = probs.sum(axis=tuple(i for i in range(vec.n_modes) if i != k))
        edge += float(marginal[-2:].sum())
    if edge > TAIL_TOL:
        raise CutoffError(f"rescaled state reaches the cutoff (edge mass {edge:.3e})")
    return FockVector(amps, max(vec.tail_mass, edge))


def _parity_supported(gate):
    """Symbolic Kerr is exact when phi_12 is 0 or pi and phi_jj are multiples of pi (mod 2 pi)."""
    def k_of(phase):
        k = phase / math.pi
        r = round(k)
        return r if abs(k - r) * math.pi <= PHASE_TOL else None

    ks = [k_of(gate.phi_11), k_of(gate.phi_22), k_of(gate.phi_12)]
    if any(k is None for k in ks):
        return None
    return ks[0] % 2, ks[1] % 2, ks[2] % 2


def kerr_phases(gate, cutoff):
    n, m = _number_grid(cutoff, 2)
    return np.exp(-1j * (gate.phi_11 * n ** 2 + gate.phi_22 * m ** 2 + gate.phi_12 * n * m))


def apply_kerr(gate, state, rescale=True, cutoff=None):
    """exp[-i(phi_11 n1^2 + phi_22 n2^2 + phi_12 n1 n2)] followed by the gate's
    per-mode amplitude factors (``rescale``).

    A CoherentSuperposition stays symbolic when the phases allow it;
    otherwise it is expanded into a FockVector (with a warning).
    """
    if isinstance(state, FockVector):
        if state.n_modes != 2:
            raise ValueError("Kerr gate acts on two-mode states")
        out = FockVector(state.amps * kerr_phases(gate, state.cutoff), state.tail_mass)
        return scale_modes(out, gate.amps) if rescale else out

    if state.n_modes != 2:
        raise ValueError("Kerr gate acts on two-mode states")
    parities = _parity_supported(gate)
    if parities is None:
        warnings.warn("gate phases have no finite coherent-state form; "
                      "falling back to the Fock representation", stacklevel=2)
        return apply_kerr(gate, to_fock(state, cutoff), rescale=rescale)

    flip_1, flip_2, cross = parities
    # exp(-i pi n^2) = (-1)^n maps |a> to |-a>
    signs = np.array([-1.0 if flip_1 else 1.0, -1.0 if flip_2 else 1.0])
    out = state.rescaled(signs)
    if cross:
        # exp(-i pi n1 n2)|a,b> = (|a,b> + |-a,b> + |a,-b> - |-a,-b>) / 2
        pieces = [out.rescaled(s).scaled(0.5 * w) for s, w in
                  (((1, 1), 1), ((-1, 1), 1), ((1, -1), 1), ((-1, -1), -1))]
        out = pieces[0] + pieces[1] + pieces[2] + pieces[3]
    return out.rescaled(gate.amps) if rescale else out


def four_term_cat(a, b) -> CoherentSuperposition:
    """(|a,b> + |-a,b> + |a,-b> - |-a,-b>) / 2."""
    return CoherentSuperposition([0.5, 0.5, 0.5, -0.5],
                                 [[a, b], [-a, b], [a, -b], [-a, -b]])


def _entropy_from_weights(p):
    p = p[p > 0]
    return float(-(p * np.log2(p)).sum())


def _schmidt_weights_symbolic(state):
    a_reps, a_idx = _unique_rows(state.amps[:, :1])
    b_reps, b_idx = _unique_rows(state.amps[:, 1:])
    coeff = np.zeros((len(a_reps), len(b_reps)), dtype=complex)
    np.add.at(coeff, (a_idx, b_idx), state.coeffs)

    def half_gram(reps):
        # |x_i> = sum_a H[a, i] |e_a> with {e_a} orthonormal (Loewdin)
        gram = _overlap_matrix(reps, reps)
        w, v = np.linalg.eigh(gram)
        keep = w > EIG_FLOOR
        return np.sqrt(w[keep])[:, None] * v[:, keep].conj().T

    schmidt = half_gram(a_reps) @ coeff @ half_gram(b_reps).T
    s = np.linalg.svd(schmidt, compute_uv=False)
    return s ** 2 / np.sum(s ** 2)


def schmidt_weights(state) -> np.ndarray:
    if state.n_modes != 2:
        raise ValueError("bipartition needs a two-mode state")
    if abs(state.norm_sq() - 1.0) > NORM_TOL:
        raise PreconditionError(f"state norm^2 {state.norm_sq():.12g} is not 1")
    if isinstance(state, FockVector):
        s = np.linalg.svd(state.amps, compute_uv=False)
        return s ** 2 / np.sum(s ** 2)
    return _schmidt_weights_symbolic(state)


def entanglement_entropy(state) -> float:
    """Entropy of entanglement between the two modes, in ebits."""
    return _entropy_from_weights(schmidt_weights(state))


@dataclass(frozen=True)
class CatBasis:
    """Even/odd cats (|x> +- |-x>) / sqrt(N+-) with N+- = 2 +- 2 exp(-2|x|^2)."""

    amp: complex

    @property
    def plus_norm(self) -> float:
        return 2.0 + 2.0 * math.exp(-2.0 * abs(self.amp) ** 2)

    @property
    def minus_norm(self) -> float:
        return -2.0 * math.expm1(-2.0 * abs(self.amp) ** 2)

    def norm(self, sign) -> float:
        return self.plus_norm if sign > 0 else self.minus_norm

    def state(self, sign) -> CoherentSuperposition:
        k = 1.0 / math.sqrt(self.norm(sign))
        return CoherentSuperposition([k, sign * k], [[self.amp], [-self.amp]])

    def overlaps(self, gammas) -> np.ndarray:
        """<+|g>, <-|g> for each amplitude g, shape (2, len(gammas))."""
        g = np.asarray(gammas, dtype=complex)
        up = coherent_overlap(self.amp, g)
        down = coherent_overlap(-self.amp, g)
        return np.array([(up + down) / math.sqrt(self.plus_norm),
                         (up - down) / math.sqrt(self.minus_norm)])

    def fock(self, sign, cutoff) -> np.ndarray:
        # |x> +- |-x> keeps only even (odd) photon numbers, twice the amplitude
        vec = 2.0 * coherent_fock(self.amp, cutoff)
        vec[1 if sign > 0 else 0::2] = 0.0
        return vec / math.sqrt(self.norm(sign))


def project_cats(state, modes, bases, weights):
    """Project ``modes`` onto sum_{s,t,..} weights[s,t,..] |s>|t>.., index 0 = |+>, 1 = |->.

    Returns (probability, normalised state of the remaining modes), the
    state being None when the probability vanishes.
    """
    modes = tuple(modes)
    weights = np.asarray(weights, dtype=complex)
    if abs(state.norm_sq() - 1.0) > NORM_TOL:
        raise PreconditionError("projection needs a normalised state")
    rest = [k for k in range(state.n_modes) if k not in modes]

    if isinstance(state, FockVector):
        target = weights
        for basis in bases:
            cats = np.array([basis.fock(+1, state.cutoff), basis.fock(-1, state.cutoff)])
            target = np.tensordot(target, cats, axes=([0], [0]))
        reduced = np.tensordot(target.conj(), state.amps, axes=(list(range(len(modes))), list(modes)))
        p = float(np.vdot(reduced, reduced).real)
        if not rest:
            return p, None
        post = FockVector(reduced / math.sqrt(p), state.tail_mass) if p > 0 else None
        return p, post

    factor = np.zeros(len(state), dtype=complex)
    per_mode = []
    for mode, basis in zip(modes, bases):
        ov = basis.overlaps(state.amps[:, mode])
        captured = abs(ov[0]) ** 2 + abs(ov[1]) ** 2
        if np.any(captured < 1.0 - SPAN_TOL):
            raise BasisMismatchError(
                f"mode {mode} has support outside span{{|{basis.amp:.4g}>, |{-basis.amp:.4g}>}} "
                f"(deficit {1.0 - captured.min():.3e})")
        per_mode.append(ov)
    # <target|terms> = sum_{s,t} conj(w[s,t]) <s|g1><t|g2>
    for combo in np.ndindex(*weights.shape):
        term = np.full(len(state), np.conj(weights[combo]))
        for ov, s in zip(per_mode, combo):
            term = term * ov[s]
        factor = factor + term
    coeffs = state.coeffs * factor
    if not rest:
        total = complex(np.sum(coeffs))
        return abs(total) ** 2, None
    if not np.any(coeffs != 0):
        return 0.0, None
    reduced = CoherentSuperposition(coeffs, state.amps[:, rest])
    p = reduced.norm_sq()
    return p, (reduced.scaled(1.0 / math.sqrt(p)) if p > 0 else None)


def project(state, mode, basis: CatBasis, sign):
    """Project one mode onto |+> (sign=+1) or |-> (sign=-1) of ``basis``."""
    weights = np.array([1.0, 0.0]) if sign > 0 else np.array([0.0, 1.0])
    return project_cats(state, (mode,), (basis,), weights)


# ---- text serialisation -------------------------------------------------

def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def superposition_to_csv(state: CoherentSuperposition) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    header = ["coeff_re", "coeff_im"]
    for k in range(state.n_modes):
        header += [f"amp{k + 1}_re", f"amp{k + 1}_im"]
    w.writerow(header)
    for c, row in zip(state.coeffs, state.amps):
        cells = [_fmt(c.real), _fmt(c.imag)]
        for a in row:
            cells += [_fmt(a.real), _fmt(a.imag)]
        w.writerow(cells)
    return buf.getvalue()


def superposition_from_csv(text: str) -> CoherentSuperposition:
    rows = list(csv.reader(io.StringIO(text)))[1:]
    vals = np.array([[float(x) for x in r] for r in rows])
    cplx = vals[:, 0::2] + 1j * vals[:, 1::2]
    return CoherentSuperposition(cplx[:, 0], cplx[:, 1:])


def fock_to_csv(vec: FockVector) -> str:
    buf = io.StringIO()
    buf.write(f"# cutoff={vec.cutoff} modes={vec.n_modes} tail_mass={_fmt(vec.tail_mass)}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow([f"n{k + 1}" for k in range(vec.n_modes)] + ["re", "im"])
    for idx in np.ndindex(*vec.amps.shape):
        a = vec.amps[idx]
        if a != 0:
            w.writerow([*idx, _fmt(a.real), _fmt(a.imag)])
    return buf.getvalue()


def fock_from_csv(text: str) -> FockVector:
    lines = text.splitlines()
    meta = dict(kv.split("=") for kv in lines[0].lstrip("# ").split())
    cutoff, modes = int(meta["cutoff"]), int(meta["modes"])
    amps = np.zeros((cutoff,) * modes, dtype=complex)
    for row in csv.reader(lines[2:]):
        idx = tuple(int(x) for x in row[:modes])
        amps[idx] = float(row[modes]) + 1j * float(row[modes + 1])
    return FockVector(amps, float(meta["tail_mass"]))
