"""Self-contained SVG output: Husimi heatmaps and log-scale sweep curves.

The writer emits a fixed element order and fixed number formatting, so equal
input gives identical bytes.
"""
import numpy as np

from .coherent import HusimiField
from .limits import SweepResult

# viridis anchors at 0, 1/8, ..., 1
_VIRIDIS = np.array([
    [68, 1, 84], [71, 44, 122], [59, 81, 139], [44, 113, 142], [33, 144, 141],
    [39, 173, 129], [92, 200, 99], [170, 220, 50], [253, 231, 37]], dtype=float)
_PALETTE = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"]
MAX_CELLS = 160


def viridis(v):
    v = np.clip(np.asarray(v, dtype=float), 0, 1) * (len(_VIRIDIS) - 1)
    i = np.minimum(v.astype(int), len(_VIRIDIS) - 2)
    frac = (v - i)[..., None]
    return np.rint(_VIRIDIS[i] * (1 - frac) + _VIRIDIS[i + 1] * frac).astype(int)


def _f(v):
    return f"{v:.2f}"


def _coarsen(Z, cells):
    # block means so the SVG stays small; trailing rows/cols that don't fill a
    # block are dropped
    out = Z
    for ax in (0, 1):
        m = out.shape[ax]
        b = max(1, int(np.ceil(m / cells)))
        k = m // b
        out = np.take(out, np.arange(k * b), axis=ax)
        shape = list(out.shape)
        shape[ax:ax + 1] = [k, b]
        out = out.reshape(shape).mean(axis=ax + 1)
    return out


def _header(w, h, title):
    return [f'<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" '
            f'viewBox="0 0 {w} {h}">',
            f'<rect width="{w}" height="{h}" fill="#ffffff"/>',
            f'<text x="{w / 2:.0f}" y="18" font-family="sans-serif" font-size="13" '
            f'text-anchor="middle">{title}</text>']


def heatmap_svg(field, title="Husimi density", cells=MAX_CELLS):
    x, y, Z = field.heatmap()
    if Z.max() > 0:
        # crop the momentum axis to where the density lives
        rows = np.flatnonzero(Z.max(axis=1) > 1e-6 * Z.max())
        keep = np.abs(y) <= max(1.0, float(np.abs(y[rows]).max()))
        y, Z = y[keep], Z[keep]
    Zc = _coarsen(Z, cells)
    ny, nx = Zc.shape
    W, H, left, top = 520, 440, 60, 30
    pw, ph = W - left - 20, H - top - 50
    cw, ch = pw / nx, ph / ny
    z = Zc / Zc.max() if Zc.max() > 0 else Zc
    rgb = viridis(z)
    out = _header(W, H, title)
    for r in range(ny):
        yy = top + ph - (r + 1) * ch
        for c in range(nx):
            R, G, B = rgb[r, c]
            out.append(f'<rect x="{_f(left + c * cw)}" y="{_f(yy)}" width="{_f(cw + 0.05)}" '
                       f'height="{_f(ch + 0.05)}" fill="#{R:02x}{G:02x}{B:02x}"/>')
    out.append(f'<rect x="{left}" y="{top}" width="{_f(pw)}" height="{_f(ph)}" fill="none" stroke="#000"/>')
    xl = "q" if field.phase_grid.grid.n == 1 else "q1"
    yl = "p" if field.phase_grid.grid.n == 1 else "q2"
    for frac in (0.0, 0.5, 1.0):
        xv = x[0] + frac * (x[-1] - x[0])
        yv = y[0] + frac * (y[-1] - y[0])
        out.append(f'<text x="{_f(left + frac * pw)}" y="{_f(top + ph + 16)}" font-family="sans-serif" '
                   f'font-size="11" text-anchor="middle">{xv:.2f}</text>')
        out.append(f'<text x="{left - 4}" y="{_f(top + ph - frac * ph + 4)}" font-family="sans-serif" '
                   f'font-size="11" text-anchor="end">{yv:.2f}</text>')
    out.append(f'<text x="{_f(left + pw / 2)}" y="{H - 12}" font-family="sans-serif" font-size="12" '
               f'text-anchor="middle">{xl}</text>')
    out.append(f'<text x="14" y="{_f(top + ph / 2)}" font-family="sans-serif" font-size="12">{yl}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def sweep_svg(sweep, title=None, columns=None):
    """Log-log curves of the defect columns against ``hbar``."""
    if not sweep.rows:
        raise ValueError("cannot plot an empty sweep")
    cols = columns or [c for c in sweep.defect_columns() if not c[-1].isdigit()]
    if not cols:
        raise ValueError("sweep has no defect columns to plot")
    hb = sweep.column("hbar")
    data = {c: sweep.column(c) for c in cols}
    pos = np.concatenate([v[v > 0] for v in data.values()] + [np.array([1e-16])])
    lo, hi = np.log10(pos.min()), np.log10(max(pos.max(), pos.min() * 10))
    xlo, xhi = np.log10(hb.min()), np.log10(hb.max())
    if xhi == xlo:
        xlo, xhi = xlo - 0.5, xhi + 0.5
    W, H, left, top = 560, 380, 70, 30
    pw, ph = W - left - 180, H - top - 50
    X = lambda v: left + (np.log10(v) - xlo) / (xhi - xlo) * pw
    Y = lambda v: top + ph - (np.log10(max(v, 10 ** lo)) - lo) / (hi - lo) * ph
    out = _header(W, H, title or sweep.experiment)
    out.append(f'<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="#000"/>')
    for e in range(int(np.floor(lo)), int(np.ceil(hi)) + 1):
        if lo <= e <= hi:
            yy = Y(10.0 ** e)
            out.append(f'<line x1="{left}" y1="{_f(yy)}" x2="{left + pw}" y2="{_f(yy)}" stroke="#ddd"/>')
            out.append(f'<text x="{left - 4}" y="{_f(yy + 4)}" font-family="sans-serif" font-size="11" '
                       f'text-anchor="end">1e{e}</text>')
    for v in hb:
        out.append(f'<text x="{_f(X(v))}" y="{top + ph + 16}" font-family="sans-serif" font-size="11" '
                   f'text-anchor="middle">{v:g}</text>')
    for k, c in enumerate(cols):
        color = _PALETTE[k % len(_PALETTE)]
        pts = " ".join(f"{_f(X(a))},{_f(Y(b))}" for a, b in zip(hb, data[c]))
        out.append(f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="1.6"/>')
        for a, b in zip(hb, data[c]):
            out.append(f'<circle cx="{_f(X(a))}" cy="{_f(Y(b))}" r="2.5" fill="{color}"/>')
        out.append(f'<text x="{left + pw + 10}" y="{top + 14 + 16 * k}" font-family="sans-serif" '
                   f'font-size="11" fill="{color}">{c}</text>')
    out.append(f'<text x="{_f(left + pw / 2)}" y="{H - 12}" font-family="sans-serif" font-size="12" '
               f'text-anchor="middle">hbar</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def emit_plot(obj, path):
    if isinstance(obj, HusimiField):
        text = heatmap_svg(obj)
    elif isinstance(obj, SweepResult):
        text = sweep_svg(obj)
    else:
        raise TypeError(f"cannot plot {type(obj).__name__}")
    with open(path, "w", newline="\n") as fh:
        fh.write(text)
    return path
