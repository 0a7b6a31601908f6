"""
Prompt Rendering

Sampled programs are shown in ascending score order so the best exemplar
comes last (best-shot prompting).
"""

from functools import lru_cache
from pathlib import Path
from string import Template
from typing import Sequence, Union

from ahd.evolution import StoredProgram
from ahd.kernelscript import MAX_STATEMENTS


@lru_cache(maxsize=8)
def load_template(path: Union[str, Path]) -> Template:
    return Template(Path(path).read_text(encoding="utf-8"))


def format_example(index: int, stored: StoredProgram) -> str:
    return f"# rule_v{index} (score {stored.score:.6g})\n```\n{stored.program.source}\n```"


def render_prompt(template: Template, programs: Sequence[StoredProgram]) -> str:
    if not programs:
        raise ValueError("A prompt needs at least one sampled program")
    ordered = sorted(programs, key=lambda p: (p.score, p.content_hash))
    return template.substitute(
        examples="\n\n".join(format_example(i, p) for i, p in enumerate(ordered)),
        count=len(ordered),
        best_index=len(ordered) - 1,
        max_statements=MAX_STATEMENTS,
    )
