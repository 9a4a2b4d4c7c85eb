"""Hand-written genomes that decode to known trigger worlds; shared by the
evolver tests and the acceptance suite."""

from neurogrid.evolver import Genome


def pocket_world_genome() -> Genome:
    """Two-cell pocket with a myopic local controller: the minimum-fear rule
    orbits the pocket. Decodes onto the default 10x10 board."""
    genes = [
        {"kind": "dims", "w": 7, "h": 5, "max_ticks": 60},
        {"kind": "wall", "x": 2, "y": 2, "len": 4, "orient": "h"},
        {"kind": "band", "cell": "risk", "orient": "row", "index": 4, "p1": 0.9},
        {"kind": "band", "cell": "risk", "orient": "row", "index": 3, "p1": 0.9},
        {"kind": "cell", "x": 0, "y": 1, "p1": 0.9},
        {"kind": "cell", "x": 0, "y": 2, "p1": 0.9},
        {"kind": "cell", "x": 1, "y": 2, "p1": 0.9},
        {"kind": "cell", "x": 1, "y": 0, "p1": 0.5},
        {"kind": "cell", "x": 2, "y": 0, "p1": 0.4},
        {"kind": "cell", "x": 1, "y": 1, "p1": 0.4},
        {"kind": "cell", "x": 2, "y": 1, "p1": 0.3},
        {"kind": "cell", "x": 3, "y": 1, "p1": 0.1},
        {"kind": "cell", "x": 3, "y": 0, "p1": 0.9},
        {"kind": "cell", "x": 4, "y": 0, "p1": 0.9},
        {"kind": "cell", "x": 5, "y": 0, "p1": 0.9},
        {"kind": "cell", "x": 6, "y": 0, "p1": 0.9},
        {"kind": "cell", "x": 4, "y": 1, "p1": 0.9},
        {"kind": "cell", "x": 5, "y": 1, "p1": 0.9},
        {"kind": "food", "x": 6, "y": 1, "meal": 5.0, "poison": 0},
        {"kind": "ctrl", "controller": "local", "canon": "fixed",
         "jitter": 0.0, "pause": 0, "idle": 0.0, "w_mem": 0.0},
    ]
    return Genome(genes)


def corridor_world_genome() -> Genome:
    """Two near-equal passages whose lower corridor's hazard estimate flickers
    by tick parity: route choice alternates at the mouth."""
    genes = [
        {"kind": "dims", "w": 7, "h": 4, "max_ticks": 60},
        {"kind": "wall", "x": 1, "y": 1, "len": 5, "orient": "h"},
        {"kind": "band", "cell": "risk", "orient": "row", "index": 2, "p1": 0.015},
        {"kind": "band", "cell": "risk", "orient": "row", "index": 3, "p1": 0.015},
        {"kind": "food", "x": 6, "y": 3, "meal": 5.0, "poison": 0},
        {"kind": "ctrl", "controller": "global", "canon": "fixed",
         "jitter": 0.0, "pause": 0, "idle": 0.0, "w_mem": 0.0,
         "flicker_amp": 0.7, "flicker_row": 0},
    ]
    return Genome(genes)


def inert_decorations() -> list[dict]:
    """Genes that decode far from the action and change nothing behavioural."""
    return [
        {"kind": "memseed", "x": 6, "y": 4, "m": 0.4},
        {"kind": "cell", "x": 6, "y": 4, "p1": 0.2},
        {"kind": "memseed", "x": 5, "y": 4, "m": 0.2},
        {"kind": "cell", "x": 5, "y": 4, "p1": 0.2},
        {"kind": "memseed", "x": 4, "y": 4, "m": 0.1},
    ]
