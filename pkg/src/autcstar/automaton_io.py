"""Reading and writing automaton definition files.

The format is YAML::

    alphabet_size: 2
    states:
      a: {output: [2, 1], sections: ["b", "c"]}

``output`` lists the 1-based images of the letters 1..d and ``sections``
lists the d target-indexed section words (``"1"`` or state names joined by
``*``, each optionally followed by ``^-1``).
"""

from __future__ import annotations

from importlib import resources
from pathlib import Path

import yaml

from .wreath_core import Automaton, validate_automaton

FIXTURES = ("swap", "odo", "subfix", "t3fix", "aleshin", "odo_tilde", "trivial")


def parse_automaton_text(text: str, level_cap: int | None = None) -> Automaton:
    raw = yaml.safe_load(text)
    if not isinstance(raw, dict):
        from .errors import AutomatonError

        raise AutomatonError("automaton file must contain a mapping")
    return validate_automaton(raw, level_cap=level_cap)


def fixture_text(name: str) -> str:
    return resources.files("autcstar.fixtures").joinpath(f"{name}.aut").read_text(encoding="utf-8")


def load_fixture(name: str, level_cap: int | None = None) -> Automaton:
    return parse_automaton_text(fixture_text(name), level_cap=level_cap)


def load_automaton(source: str | Path, level_cap: int | None = None) -> Automaton:
    """Load from a path; a bare fixture name such as ``aleshin`` also works."""
    path = Path(source)
    if path.exists():
        return parse_automaton_text(path.read_text(encoding="utf-8"), level_cap=level_cap)
    stem = path.name[:-4] if path.name.endswith(".aut") else path.name
    if stem in FIXTURES:
        return load_fixture(stem, level_cap=level_cap)
    raise FileNotFoundError(f"no automaton file or bundled fixture named {str(source)!r}")


def dump_automaton(automaton: Automaton) -> str:
    lines = [f"alphabet_size: {automaton.alphabet_size}", "states:"]
    for name, body in automaton.to_raw()["states"].items():
        out = ", ".join(str(x) for x in body["output"])
        secs = ", ".join(f'"{s}"' for s in body["sections"])
        lines.append(f"  {name}: {{output: [{out}], sections: [{secs}]}}")
    return "\n".join(lines) + "\n"
