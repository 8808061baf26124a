"""Parameter sets for reproducing the published figures.

Curves are ``(lambda2, J)`` pairs at a detuning.  Where a legend is not
spelled out in the accompanying text the curve is flagged ``uncertain``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

EARLY = (0.0, 50.0, 5001)
LONG = (0.0, 200.0, 8001)
ASYMPTOTIC = (100.0, 200.0, 2001)


@dataclass(frozen=True)
class Curve:
    init: str
    lambda2: float
    j_ising: float
    delta: float
    uncertain: bool = False

    @property
    def label(self) -> str:
        return (f"{self.init}_lam2_{_num(self.lambda2)}_J_{_num(self.j_ising)}"
                f"_delta_{_num(self.delta)}")


@dataclass(frozen=True)
class SweepSpec:
    init: str
    lambda2: float
    delta: float
    start: float
    stop: float
    steps: int
    param: str = "j_ising"
    uncertain: bool = False


@dataclass(frozen=True)
class FigurePreset:
    name: str
    quantity: str
    window: tuple = EARLY
    curves: tuple = ()
    sweep: Optional[SweepSpec] = None
    nbar: float = 100.0
    notes: str = ""


def _num(x: float) -> str:
    s = f"{x:g}"
    return s.replace("-", "m").replace(".", "p")


def _curves(init, pairs, delta, uncertain=()):
    return tuple(Curve(init, float(a), float(b), float(delta), (a, b) in uncertain)
                 for a, b in pairs)


FIG1A = [(0, 0), (0, 2), (2, 0), (4, 0), (4, 1), (2, -2), (2, -4), (4, -4)]
FIG1BC = [(0, 0), (0, 2), (0, -2), (2, 0), (4, 0), (2, 2), (2, -2)]
COLLAPSE = [(0, 0), (0, 2), (0, -2), (2, 0), (2, 2), (2, -2)]


def _build() -> dict[str, FigurePreset]:
    p = {}
    p["fig1a"] = FigurePreset("fig1a", "eof", EARLY, _curves("bell_c", FIG1A, 0.0))
    for name, d in (("fig1b", 2.0), ("fig1c", -2.0)):
        p[name] = FigurePreset(name, "eof", EARLY,
                               _curves("bell_c", FIG1BC, d, uncertain={(4, 0)}))
    p["fig1d"] = FigurePreset("fig1d", "eof", LONG,
                              _curves("bell_c", [(4, -4), (4, -8)], -2.0))

    p["fig2a"] = FigurePreset("fig2a", "eof", (0.0, 50.0, 1001),
                              sweep=SweepSpec("bell_c", 2.0, -2.0, -10.0, 10.0, 81))
    p["fig2b"] = FigurePreset("fig2b", "eof", ASYMPTOTIC,
                              sweep=SweepSpec("bell_c", 2.0, -2.0, -10.0, 10.0, 81))
    p["fig2c"] = FigurePreset("fig2c", "eof", ASYMPTOTIC,
                              sweep=SweepSpec("bell_a", 2.0, -2.0, -10.0, 10.0, 81))

    for name, d in (("fig3a", 0.0), ("fig3b", 2.0), ("fig3c", -2.0)):
        p[name] = FigurePreset(name, "sigma_z", EARLY, _curves("bell_c", COLLAPSE, d))
    p["fig3d"] = FigurePreset("fig3d", "sigma_z", LONG,
                              _curves("bell_c", [(4, -4), (4, -8)], -2.0))

    for fig, q in (("fig4", "eof"), ("fig6", "sigma_z")):
        for sub, d in (("a", 0.0), ("b", 2.0), ("c", -2.0)):
            p[fig + sub] = FigurePreset(
                fig + sub, q, EARLY,
                _curves("w_like", COLLAPSE, d, uncertain=set(COLLAPSE) - {(0, 2)}),
                notes="legend only partly given in the text")
        p[fig + "d"] = FigurePreset(
            fig + "d", q, LONG,
            tuple(Curve("w_like", 4.0, -4.0, d) for d in (0.0, 2.0, -2.0)))

    p["fig5a"] = FigurePreset("fig5a", "eof", (0.0, 50.0, 1001),
                              sweep=SweepSpec("w_like", 4.0, -2.0, -5.0, 5.0, 51))
    p["fig5b"] = FigurePreset("fig5b", "eof", ASYMPTOTIC,
                              sweep=SweepSpec("w_like", 4.0, -2.0, -5.0, 5.0, 51))

    for fig, q in (("fig7", "eof"), ("fig9", "sigma_z")):
        # the population panels reuse the entanglement legend, which the text does not confirm
        unsure = set(COLLAPSE) if fig == "fig9" else set()
        for sub, d in (("a", 0.0), ("b", 2.0), ("c", -2.0)):
            p[fig + sub] = FigurePreset(fig + sub, q, EARLY,
                                        _curves("linear", COLLAPSE, d, uncertain=unsure))
        p[fig + "d"] = FigurePreset(
            fig + "d", q, LONG,
            tuple(Curve("linear", 2.0, -2.0, d, uncertain=(fig == "fig7"))
                  for d in (0.0, 2.0, -2.0)))

    p["fig8a"] = FigurePreset("fig8a", "eof", (0.0, 50.0, 1001),
                              sweep=SweepSpec("linear", 2.0, 2.0, -5.0, 5.0, 101,
                                              uncertain=True),
                              notes="J range not stated; critical J near 0.95")
    p["fig8b"] = FigurePreset("fig8b", "eof", ASYMPTOTIC,
                              sweep=SweepSpec("linear", 2.0, 2.0, -5.0, 5.0, 101,
                                              uncertain=True),
                              notes="J range not stated; critical J near 0.95")

    for name, d in (("fig10a", 0.0), ("fig10b", 2.0), ("fig10c", -2.0)):
        p[name] = FigurePreset(name, "tangle", EARLY,
                               _curves("bell_c", COLLAPSE, d, uncertain={(2, -2)}))
    p["fig10d"] = FigurePreset("fig10d", "tangle", LONG,
                               _curves("bell_c", [(4, -4), (4, -8)], -2.0))

    p["fig11a"] = FigurePreset("fig11a", "tangle", EARLY, _curves("w_like", COLLAPSE, 0.0,
                                                                    uncertain={(2, -2)}))
    p["fig11b"] = FigurePreset(
        "fig11b", "tangle", LONG,
        tuple(Curve("w_like", 4.0, -4.0, d, uncertain=True) for d in (0.0, 2.0, -2.0)))
    p["fig11c"] = FigurePreset("fig11c", "tangle", EARLY, _curves("linear", COLLAPSE, 0.0,
                                                                    uncertain={(2, -2)}))
    p["fig11d"] = FigurePreset(
        "fig11d", "tangle", LONG,
        tuple(Curve("linear", 2.0, -2.0, d, uncertain=True) for d in (0.0, 2.0, -2.0)))
    return p


FIGURES = _build()


def get(name: str) -> FigurePreset:
    try:
        return FIGURES[name.lower()]
    except KeyError:
        raise KeyError(f"unknown preset {name!r}") from None
