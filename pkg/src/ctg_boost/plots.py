"""Dependency-free SVG figures: ROC curves, class prediction error, validation curve.

Every figure embeds the data it was drawn from as an XML comment.
"""
from __future__ import annotations

from xml.sax.saxutils import escape

import numpy as np

WIDTH, HEIGHT = 480, 360
MARGIN = dict(left=56, right=16, top=32, bottom=48)
PALETTE = ("#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd")


def _comment(data: str) -> str:
    # "--" is not allowed inside an XML comment
    return "<!-- data\n" + data.replace("--", "- -") + "-->\n"


def _num(v: float) -> str:
    return f"{v:.2f}"


class _Canvas:
    def __init__(self, title, xlabel, ylabel, xlim, ylim, data_csv):
        self.xlim, self.ylim = xlim, ylim
        self.x0, self.x1 = MARGIN["left"], WIDTH - MARGIN["right"]
        self.y0, self.y1 = HEIGHT - MARGIN["bottom"], MARGIN["top"]
        self.parts = [
            '<?xml version="1.0" encoding="UTF-8"?>\n',
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
            f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="11">\n',
            _comment(data_csv),
            f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>\n',
            f'<text x="{WIDTH / 2}" y="18" text-anchor="middle" font-size="13">{escape(title)}</text>\n',
            f'<text x="{(self.x0 + self.x1) / 2}" y="{HEIGHT - 10}" text-anchor="middle">{escape(xlabel)}</text>\n',
            f'<text x="14" y="{(self.y0 + self.y1) / 2}" text-anchor="middle" '
            f'transform="rotate(-90 14 {(self.y0 + self.y1) / 2})">{escape(ylabel)}</text>\n',
        ]
        self._axes()

    def sx(self, x):
        lo, hi = self.xlim
        return self.x0 + (x - lo) / ((hi - lo) or 1.0) * (self.x1 - self.x0)

    def sy(self, y):
        lo, hi = self.ylim
        return self.y0 - (y - lo) / ((hi - lo) or 1.0) * (self.y0 - self.y1)

    def _axes(self):
        p = self.parts
        p.append(f'<line x1="{self.x0}" y1="{self.y0}" x2="{self.x1}" y2="{self.y0}" stroke="black"/>\n')
        p.append(f'<line x1="{self.x0}" y1="{self.y0}" x2="{self.x0}" y2="{self.y1}" stroke="black"/>\n')
        for t in np.linspace(*self.ylim, 5):
            y = self.sy(t)
            p.append(f'<line x1="{self.x0 - 4}" y1="{_num(y)}" x2="{self.x0}" y2="{_num(y)}" stroke="black"/>\n')
            p.append(f'<text x="{self.x0 - 6}" y="{_num(y + 4)}" text-anchor="end">{t:.3g}</text>\n')

    def xticks(self, values, labels=None):
        labels = labels or [f"{v:.3g}" for v in values]
        for v, lab in zip(values, labels):
            x = self.sx(v)
            self.parts.append(f'<line x1="{_num(x)}" y1="{self.y0}" x2="{_num(x)}" y2="{self.y0 + 4}" stroke="black"/>\n')
            self.parts.append(f'<text x="{_num(x)}" y="{self.y0 + 16}" text-anchor="middle">{escape(str(lab))}</text>\n')

    def polyline(self, xs, ys, color, dash=False):
        pts = " ".join(f"{_num(self.sx(x))},{_num(self.sy(y))}" for x, y in zip(xs, ys))
        extra = ' stroke-dasharray="4 3"' if dash else ""
        self.parts.append(f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="1.5"{extra}/>\n')

    def rect(self, x, y, w, h, color):
        self.parts.append(
            f'<rect x="{_num(x)}" y="{_num(y)}" width="{_num(w)}" height="{_num(h)}" fill="{color}"/>\n'
        )

    def legend(self, labels):
        for i, label in enumerate(labels):
            y = self.y1 + 8 + 14 * i
            x = self.x1 - 150
            self.parts.append(f'<rect x="{x}" y="{y - 8}" width="10" height="10" fill="{PALETTE[i % len(PALETTE)]}"/>\n')
            self.parts.append(f'<text x="{x + 14}" y="{y + 1}">{escape(label)}</text>\n')

    def render(self) -> str:
        return "".join(self.parts) + "</svg>\n"


def roc_svg(curves: dict, class_names) -> str:
    """``curves`` maps class index to a ``metrics.RocCurve``."""
    rows = ["class,fpr,tpr"]
    for k, c in curves.items():
        rows += [f"{class_names[k]},{f!r},{t!r}" for f, t in zip(c.fpr.tolist(), c.tpr.tolist())]
    cv = _Canvas("ROC curves (one-vs-rest)", "False positive rate", "True positive rate",
                 (0.0, 1.0), (0.0, 1.0), "\n".join(rows) + "\n")
    cv.xticks(np.linspace(0, 1, 5))
    cv.polyline([0, 1], [0, 1], "#999999", dash=True)
    labels = []
    for i, (k, c) in enumerate(curves.items()):
        cv.polyline(c.fpr, c.tpr, PALETTE[i % len(PALETTE)])
        labels.append(f"{class_names[k]} (AUC {c.auc:.4f})")
    cv.legend(labels)
    return cv.render()


def class_error_svg(bars: np.ndarray, class_names) -> str:
    """Stacked bars: one per true class, segments coloured by predicted class."""
    bars = np.asarray(bars)
    rows = ["true_class," + ",".join(f"pred_{n}" for n in class_names)]
    rows += [f"{class_names[i]}," + ",".join(str(int(v)) for v in bars[i]) for i in range(len(bars))]
    top = max(int(bars.sum(axis=1).max()), 1)
    cv = _Canvas("Class prediction error", "True class", "Number of predicted rows",
                 (0.0, float(len(bars))), (0.0, float(top)), "\n".join(rows) + "\n")
    cv.xticks([i + 0.5 for i in range(len(bars))], list(class_names))
    width = (cv.x1 - cv.x0) / len(bars) * 0.6
    for i, row in enumerate(bars):
        base = 0
        for j, v in enumerate(row):
            if v:
                cv.rect(cv.sx(i + 0.5) - width / 2, cv.sy(base + v), width, cv.sy(base) - cv.sy(base + v),
                        PALETTE[j % len(PALETTE)])
            base += int(v)
    cv.legend([f"predicted {n}" for n in class_names])
    return cv.render()


def validation_curve_svg(param: str, values, train_scores, cv_scores, metric: str = "accuracy") -> str:
    values = [float(v) for v in values]
    rows = [f"{param},train_score,cv_score"]
    rows += [f"{v!r},{t!r},{c!r}" for v, t, c in zip(values, list(train_scores), list(cv_scores))]
    lo = min(min(train_scores), min(cv_scores))
    hi = max(max(train_scores), max(cv_scores))
    pad = (hi - lo) * 0.05 or 0.01
    xlim = (min(values), max(values)) if len(values) > 1 else (values[0] - 1, values[0] + 1)
    cv = _Canvas("Validation curve", param, metric, xlim, (lo - pad, hi + pad), "\n".join(rows) + "\n")
    cv.xticks(values)
    cv.polyline(values, train_scores, PALETTE[0])
    cv.polyline(values, cv_scores, PALETTE[1])
    cv.legend(["training score", "cross-validation score"])
    return cv.render()
