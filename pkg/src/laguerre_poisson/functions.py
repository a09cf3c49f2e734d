"""Functions of one positive variable stored on a grid, with exact piecewise integrals.

Values are held as ``(log|f|, sign)`` so weights such as e^{-2y^2} or
e^{p y^2 / 2} survive far past the double range of their plain values.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass

import numpy as np

from .special import DomainError

__all__ = [
    "Interp",
    "Extension",
    "TabulatedFunction",
    "ExactFunction",
    "log_expm1_ratio",
    "log_power_segment",
    "log_spaced_nodes",
    "random_piecewise_linear",
]


class Interp:
    LINEAR = "linear"
    LINEAR_IN_LOG = "linear_in_log"


@dataclass(frozen=True)
class Extension:
    """Behaviour outside the node range: zero, or a power tail y^k past the last node."""

    kind: str = "zero"
    exponent: float = 0.0

    @classmethod
    def zero(cls):
        return cls("zero")

    @classmethod
    def power_tail(cls, k):
        return cls("power_tail", float(k))

    def __str__(self):
        return "zero" if self.kind == "zero" else f"power_tail({self.exponent!r})"

    @classmethod
    def parse(cls, text):
        text = text.strip()
        if text == "zero":
            return cls.zero()
        m = re.fullmatch(r"power_tail\((.+)\)", text)
        if not m:
            raise ValueError(f"unknown extension {text!r}")
        return cls.power_tail(float(m.group(1)))


def log_expm1_ratio(c):
    """ln((e^c - 1)/c), stable for all real c (0 at c = 0)."""
    c = np.asarray(c, dtype=float)
    out = np.zeros_like(c)
    pos = c > 1e-12
    neg = c < -1e-12
    cp, cn = c[pos], c[neg]
    out[pos] = cp + np.log(-np.expm1(-cp)) - np.log(cp)
    out[neg] = np.log(-np.expm1(cn)) - np.log(-cn)
    mid = ~(pos | neg)
    out[mid] = 0.5 * c[mid]
    return out


def log_power_segment(y0, y1, l0, slope):
    """ln of the integral over [y0, y1] of e^{l0} (y/y0)^slope dy."""
    y0 = np.asarray(y0, dtype=float)
    y1 = np.asarray(y1, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        d = np.log(y1) - np.log(y0)
        out = l0 + np.log(y0) + np.log(d) + log_expm1_ratio((slope + 1) * d)
    return np.where((y1 > y0) & np.isfinite(l0), out, -np.inf)


def log_spaced_nodes(lo, hi, n):
    return np.geomspace(lo, hi, n)


class TabulatedFunction:
    """A function of y > 0 given on strictly increasing nodes.

    ``interp`` is ``"linear"`` (values linear in y) or ``"linear_in_log"``
    (ln|f| linear in ln y, i.e. a power law on every segment; requires a
    constant sign). Outside the nodes the function is zero, or follows
    f(y_N) (y/y_N)^k past the last node for a ``power_tail(k)`` extension.
    """

    def __init__(self, nodes, values=None, *, log_values=None, signs=None,
                 interp=Interp.LINEAR_IN_LOG, extension=None):
        nodes = np.asarray(nodes, dtype=float)
        if nodes.ndim != 1 or len(nodes) < 2:
            raise DomainError("need at least two nodes")
        if np.any(nodes <= 0) or np.any(np.diff(nodes) <= 0):
            raise DomainError("nodes must be positive and strictly increasing")
        if interp not in (Interp.LINEAR, Interp.LINEAR_IN_LOG):
            raise DomainError(f"unknown interpolation {interp!r}")
        if (values is None) == (log_values is None):
            raise DomainError("give exactly one of values / log_values")
        if values is not None:
            values = np.asarray(values, dtype=float)
            with np.errstate(divide="ignore"):
                log_values = np.log(np.abs(values))
            signs = np.sign(values)
        else:
            log_values = np.asarray(log_values, dtype=float)
            signs = np.ones_like(log_values) if signs is None else np.asarray(signs, float)
            signs = np.where(np.isneginf(log_values), 0.0, signs)
        if log_values.shape != nodes.shape:
            raise DomainError("nodes and values differ in length")
        if interp == Interp.LINEAR_IN_LOG and np.any(signs < 0) and np.any(signs > 0):
            raise DomainError("linear_in_log interpolation needs a constant sign")
        self.nodes = nodes
        self.log_values = log_values
        self.signs = signs
        self.interp = interp
        self.extension = extension or Extension.zero()
        self._log_nodes = np.log(nodes)
        self._nodes_ro()

    def _nodes_ro(self):
        for a in (self.nodes, self.log_values, self.signs, self._log_nodes):
            a.setflags(write=False)

    # construction helpers -------------------------------------------------
    @classmethod
    def from_function(cls, fn, nodes, *, log=False, interp=Interp.LINEAR_IN_LOG, extension=None):
        """Sample ``fn`` on ``nodes``; with ``log=True`` fn returns ln f (f > 0)."""
        nodes = np.asarray(nodes, dtype=float)
        if log:
            return cls(nodes, log_values=fn(nodes), interp=interp, extension=extension)
        return cls(nodes, fn(nodes), interp=interp, extension=extension)

    @classmethod
    def constant(cls, c, nodes, extension=None):
        return cls(nodes, np.full(len(nodes), float(c)), interp=Interp.LINEAR, extension=extension)

    def with_log_values(self, log_values, signs=None):
        return TabulatedFunction(self.nodes, log_values=log_values,
                                 signs=self.signs if signs is None else signs,
                                 interp=self.interp, extension=self.extension)

    @property
    def values(self):
        with np.errstate(over="ignore"):
            return self.signs * np.exp(self.log_values)

    @property
    def is_positive(self):
        return bool(np.all(self.signs > 0))

    # pointwise algebra (on the node values) --------------------------------
    def scale(self, c):
        if c == 0:
            return self.with_log_values(np.full_like(self.log_values, -np.inf))
        return self.with_log_values(self.log_values + math.log(abs(c)), self.signs * np.sign(c))

    def abs(self):
        return self.with_log_values(self.log_values, np.abs(self.signs))

    def power(self, q):
        """|f|^q (node-wise)."""
        with np.errstate(invalid="ignore"):
            lv = np.where(np.isneginf(self.log_values), -np.inf if q > 0 else np.inf,
                          q * self.log_values)
        ext = self.extension
        if ext.kind == "power_tail":
            ext = Extension.power_tail(q * ext.exponent)
        return TabulatedFunction(self.nodes, log_values=lv, signs=np.abs(self.signs),
                                 interp=self.interp, extension=ext)

    def times_log(self, log_factor, tail_exponent=None):
        """f(y) * exp(log_factor(y)) node-wise."""
        lf = log_factor(self.nodes)
        ext = self.extension
        if tail_exponent is not None and ext.kind == "power_tail":
            ext = Extension.power_tail(ext.exponent + tail_exponent)
        return TabulatedFunction(self.nodes, log_values=self.log_values + lf, signs=self.signs,
                                 interp=self.interp, extension=ext)

    def resample(self, nodes):
        nodes = np.asarray(nodes, dtype=float)
        return TabulatedFunction(nodes, log_values=self.log_abs(nodes), signs=self.sign(nodes),
                                 interp=self.interp, extension=self.extension)

    # evaluation -----------------------------------------------------------
    def _locate(self, y):
        k = np.searchsorted(self.nodes, y, side="right") - 1
        return np.clip(k, 0, len(self.nodes) - 2)

    def _eval(self, y):
        """Returns (log|f|, sign) at y."""
        y = np.asarray(y, dtype=float)
        k = self._locate(y)
        y0, y1 = self.nodes[k], self.nodes[k + 1]
        inside = (y >= self.nodes[0]) & (y <= self.nodes[-1])
        if self.interp == Interp.LINEAR:
            v0 = self.signs[k] * np.exp(self.log_values[k] - self._ref(k))
            v1 = self.signs[k + 1] * np.exp(self.log_values[k + 1] - self._ref(k))
            w = (y - y0) / (y1 - y0)
            v = v0 + w * (v1 - v0)
            with np.errstate(divide="ignore"):
                la = np.log(np.abs(v)) + self._ref(k)
            sg = np.sign(v)
        else:
            ly = np.log(np.where(y > 0, y, 1.0))
            l0, l1 = self.log_values[k], self.log_values[k + 1]
            w = (ly - self._log_nodes[k]) / (self._log_nodes[k + 1] - self._log_nodes[k])
            with np.errstate(invalid="ignore"):
                la = np.where(np.isneginf(l0) | np.isneginf(l1), -np.inf, l0 + w * (l1 - l0))
            sg = np.where(self.signs[k] != 0, self.signs[k], self.signs[k + 1])
            sg = np.where(np.isneginf(la), 0.0, sg)
        la = np.where(inside, la, -np.inf)
        sg = np.where(inside, sg, 0.0)
        if self.extension.kind == "power_tail":
            above = y > self.nodes[-1]
            if np.any(above):
                la = np.where(above, self.log_values[-1] + self.extension.exponent
                              * (np.log(np.where(above, y, 1.0)) - self._log_nodes[-1]), la)
                sg = np.where(above, self.signs[-1], sg)
        return la, sg

    def log_abs_extrapolated(self, y):
        """ln|f(y)| with power laws continued from the end segments outside the nodes.

        Used where a weight must be defined on all of (0, inf); a power-tail
        extension takes precedence at the upper end.
        """
        y = np.asarray(y, dtype=float)
        la, _ = self._eval(np.clip(y, self.nodes[0], self.nodes[-1]))
        ly = np.log(y)
        ln, lv = self._log_nodes, self.log_values
        with np.errstate(invalid="ignore"):
            lo_slope = (lv[1] - lv[0]) / (ln[1] - ln[0])
            hi_slope = (lv[-1] - lv[-2]) / (ln[-1] - ln[-2])
        if self.extension.kind == "power_tail":
            hi_slope = self.extension.exponent
        with np.errstate(invalid="ignore"):
            below = np.where(np.isneginf(lv[0]), -np.inf, lv[0] + lo_slope * (ly - ln[0]))
            above = np.where(np.isneginf(lv[-1]), -np.inf, lv[-1] + hi_slope * (ly - ln[-1]))
        out = np.where(y < self.nodes[0], below, np.where(y > self.nodes[-1], above, la))
        return out if out.ndim else float(out)

    def _ref(self, k):
        # per-segment reference scale for the linear interpolant
        a, b = self.log_values[k], self.log_values[k + 1]
        r = np.maximum(a, b)
        return np.where(np.isfinite(r), r, 0.0)

    def log_abs(self, y):
        la, _ = self._eval(y)
        return la if np.ndim(la) else float(la)

    def sign(self, y):
        _, s = self._eval(y)
        return s if np.ndim(s) else float(s)

    def __call__(self, y):
        la, sg = self._eval(y)
        with np.errstate(over="ignore"):
            out = sg * np.exp(la)
        return out if np.ndim(out) else float(out)

    # exact integrals of |f| ------------------------------------------------
    def log_abs_integral_pieces(self, a, b):
        """ln of the integral of |f| over [a, b], where each [a_i, b_i] lies in a
        single segment (or entirely in an extension region)."""
        a = np.atleast_1d(np.asarray(a, dtype=float))
        b = np.atleast_1d(np.asarray(b, dtype=float))
        out = np.full(np.broadcast(a, b).shape, -np.inf)
        a, b = np.broadcast_arrays(a, b)
        valid = b > a
        if not valid.any():
            return out
        mid = 0.5 * (a + b)
        la, sa = self._eval(a)
        lb, sb = self._eval(b)
        above = mid > self.nodes[-1]
        inside = (mid >= self.nodes[0]) & ~above
        if self.interp == Interp.LINEAR_IN_LOG:
            with np.errstate(divide="ignore", invalid="ignore"):
                slope = (lb - la) / (np.log(b) - np.log(a))
            slope = np.where(np.isfinite(slope), slope, 0.0)   # sub-ulp intervals
            sel = valid & inside & np.isfinite(la) & np.isfinite(lb)
            out[sel] = log_power_segment(a[sel], b[sel], la[sel], slope[sel])
        else:
            sel = valid & inside
            if sel.any():
                ref = np.maximum(la[sel], lb[sel])
                ref = np.where(np.isfinite(ref), ref, 0.0)
                fa = sa[sel] * np.exp(la[sel] - ref)
                fb = sb[sel] * np.exp(lb[sel] - ref)
                same = fa * fb >= 0
                with np.errstate(divide="ignore", invalid="ignore"):
                    area = np.where(same, 0.5 * (np.abs(fa) + np.abs(fb)),
                                    0.5 * (fa * fa + fb * fb) / (np.abs(fa) + np.abs(fb)))
                    out[sel] = np.log(b[sel] - a[sel]) + np.log(area) + ref
        if self.extension.kind == "power_tail":
            sel = valid & above & np.isfinite(la)
            out[sel] = log_power_segment(a[sel], b[sel], la[sel], self.extension.exponent)
        return out

    def log_abs_integral(self, a, b):
        """ln of the integral of |f| over [a, b] (b may be inf for power tails)."""
        if not b > a:
            return -np.inf
        tail = -np.inf
        if np.isinf(b):
            if self.extension.kind != "power_tail":
                b = self.nodes[-1]
            else:
                k = self.extension.exponent
                start = max(a, self.nodes[-1])
                if not np.isneginf(self.log_values[-1]):
                    if k >= -1:
                        return np.inf
                    tail = (self.log_values[-1] + k * (math.log(start) - self._log_nodes[-1])
                            + math.log(start) - math.log(-(k + 1)))
                b = start
                if not b > a:
                    return tail
        inner = self.nodes[(self.nodes > a) & (self.nodes < b)]
        pts = np.concatenate([[a], inner, [b]])
        pieces = self.log_abs_integral_pieces(pts[:-1], pts[1:])
        return float(np.logaddexp.reduce(np.append(pieces, tail)))

    # serialization --------------------------------------------------------
    def to_csv(self, path_or_file=None):
        """Two-column CSV (node, value) with a one-line header.

        Values outside double range are written as ``<mantissa>e<exponent>``
        recovered from the stored logarithm, so nothing is lost to overflow.
        """
        lines = [f"# nodes={len(self.nodes)} interp={self.interp} ext={self.extension}"]
        for y, lv, s in zip(self.nodes, self.log_values, self.signs):
            lines.append(f"{y:.17g},{_format_log_value(lv, s)}")
        text = "\n".join(lines) + "\n"
        if path_or_file is None:
            return text
        if hasattr(path_or_file, "write"):
            path_or_file.write(text)
        else:
            with open(path_or_file, "w") as fh:
                fh.write(text)
        return text

    @classmethod
    def from_csv(cls, source):
        if hasattr(source, "read"):
            text = source.read()
        elif isinstance(source, str) and "\n" in source:
            text = source
        else:
            with open(source) as fh:
                text = fh.read()
        lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
        m = re.fullmatch(r"#\s*nodes=(\d+)\s+interp=(\S+)\s+ext=(\S+)", lines[0])
        if not m:
            raise ValueError("missing '# nodes=<n> interp=<kind> ext=<kind>' header")
        n, interp, ext = int(m.group(1)), m.group(2), Extension.parse(m.group(3))
        rows = [ln.split(",") for ln in lines[1:] if not ln.startswith("#")]
        if len(rows) != n:
            raise ValueError(f"header promises {n} rows, found {len(rows)}")
        nodes = np.array([float(r[0]) for r in rows])
        parsed = [_parse_log_value(r[1]) for r in rows]
        lv = np.array([p[0] for p in parsed])
        sg = np.array([p[1] for p in parsed])
        return cls(nodes, log_values=lv, signs=sg, interp=interp, extension=ext)

    def __repr__(self):
        return (f"TabulatedFunction(n={len(self.nodes)}, range=[{self.nodes[0]:.3g}, "
                f"{self.nodes[-1]:.3g}], interp={self.interp}, ext={self.extension})")


_LOG10 = math.log(10.0)


def _format_log_value(lv, sign):
    if sign == 0 or np.isneginf(lv):
        return "0"
    if abs(lv) < 700:
        return f"{sign * math.exp(lv):.17g}"
    e10 = lv / _LOG10
    exp = math.floor(e10)
    mant = sign * 10 ** (e10 - exp)
    return f"{mant:.17g}e{exp:d}"


def _parse_log_value(text):
    text = text.strip()
    m = re.fullmatch(r"([-+]?(?:\d+\.?\d*|\.\d+))(?:[eE]([-+]?\d+))?", text)
    if not m:
        raise ValueError(f"cannot parse value {text!r}")
    mant = float(m.group(1))
    if mant == 0:
        return -np.inf, 0.0
    exp = int(m.group(2) or 0)
    return math.log(abs(mant)) + exp * _LOG10, float(np.sign(mant))


def random_piecewise_linear(rng, y_max, y_min=0.01, knots=(10, 40), value_range=(0.0, 10.0)):
    """Seeded random nonnegative piecewise-linear test function (zero outside the knots)."""
    n = int(rng.integers(knots[0], knots[1] + 1))
    inner = np.sort(rng.uniform(y_min, y_max, n - 2))
    nodes = np.unique(np.concatenate([[y_min], inner, [y_max]]))
    vals = rng.uniform(*value_range, len(nodes))
    return TabulatedFunction(nodes, vals, interp=Interp.LINEAR)


class ExactFunction:
    """A function given by a formula, evaluated in log space on a finite support.

    ``log_abs`` maps y to ln|f(y)|; ``sign`` (optional) to the sign of f.
    Quacks like a TabulatedFunction for the transforms: ``nodes`` holds
    breakpoints spanning the support and the extension is zero.
    """

    def __init__(self, log_abs, sign=None, support=(1e-4, 30.0), breakpoints=None):
        lo, hi = support
        if not 0 < lo < hi:
            raise DomainError("support must satisfy 0 < lo < hi")
        self._log_abs = log_abs
        self._sign = sign
        pts = np.geomspace(lo, hi, 64)
        if breakpoints is not None:
            pts = np.concatenate([pts, np.asarray(breakpoints, float)])
        self.nodes = np.unique(np.clip(pts, lo, hi))
        self.extension = Extension.zero()

    @classmethod
    def from_values(cls, fn, support=(1e-4, 30.0), breakpoints=None):
        def la(y):
            with np.errstate(divide="ignore"):
                return np.log(np.abs(fn(y)))
        return cls(la, lambda y: np.sign(fn(y)), support, breakpoints)

    def _eval(self, y):
        y = np.asarray(y, dtype=float)
        inside = (y >= self.nodes[0]) & (y <= self.nodes[-1])
        ys = np.where(inside, y, self.nodes[0])
        la = np.where(inside, self._log_abs(ys), -np.inf)
        sg = np.ones_like(la) if self._sign is None else np.sign(self._sign(ys))
        return la, np.where(inside & np.isfinite(la), sg, 0.0)

    def log_abs_extrapolated(self, y):
        """ln|f(y)| from the formula, ignoring the support."""
        out = np.asarray(self._log_abs(np.asarray(y, dtype=float)), dtype=float)
        return out if out.ndim else float(out)

    def log_abs(self, y):
        return self._eval(y)[0]

    def sign(self, y):
        return self._eval(y)[1]

    def __call__(self, y):
        la, sg = self._eval(y)
        with np.errstate(over="ignore"):
            out = sg * np.exp(la)
        return out if np.ndim(out) else float(out)

    def tabulate(self, nodes, interp=Interp.LINEAR_IN_LOG):
        nodes = np.asarray(nodes, dtype=float)
        la, sg = self._eval(nodes)
        return TabulatedFunction(nodes, log_values=la, signs=sg, interp=interp)
