"""Utilities for rendering and writing artifacts."""
from __future__ import annotations

import json
import os
import tempfile
from pathlib import Path
from typing import Any, Mapping, Optional, Union

from faircause.core import CausalGraph
from faircause.exceptions import IoError
from faircause.settings import INTERVENTIONAL_SHAPE, OBSERVATIONAL_SHAPE, ROLE_COLORS


def canonical_json(document: Any) -> str:
    """Serialize a document with sorted keys and a trailing newline.

    Args:
        document: JSON-compatible value.

    Returns:
        Text that is identical for equal documents.
    """
    return json.dumps(document, sort_keys=True, indent=2, allow_nan=False) + "\n"


def _quote(text: str) -> str:
    escaped = text.replace("\\", "\\\\").replace('"', '\\"').replace("\n", "\\n")
    return f'"{escaped}"'


def graph_to_dot(
    g: CausalGraph,
    roles: Optional[Mapping[str, str]] = None,
    labels: Optional[Mapping[str, str]] = None,
) -> str:
    """Render a graph in DOT.

    Interventional nodes are boxes, observational nodes ellipses. Nodes with a
    cause role are filled with the role's color.

    Args:
        g: The graph.
        roles: Optional cause role per node.
        labels: Optional extra label line per node.

    Returns:
        The DOT document.
    """
    roles = roles or {}
    labels = labels or {}
    lines = ["digraph G {"]
    for node in sorted(g.nodes):
        shape = INTERVENTIONAL_SHAPE if g.is_interventional(node) else OBSERVATIONAL_SHAPE
        attrs = [f"shape={shape}"]
        if node in labels:
            label = _quote("\n".join((node, labels[node])))
            attrs.append(f"label={label}")
        if node in roles:
            attrs.append(f"style=filled, fillcolor={ROLE_COLORS[roles[node]]}")
        lines.append(f"  {_quote(node)} [{', '.join(attrs)}];")
    for u, v in g.sorted_edges():
        lines.append(f"  {_quote(u)} -> {_quote(v)};")
    lines.append("}")
    return "\n".join(lines) + "\n"


def atomic_write(path: Union[str, Path], text: str) -> None:
    """Write text through a temporary file renamed over the target.

    Args:
        path: Destination file.
        text: Content, written as UTF-8 with LF line endings.
    """
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
        try:
            with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as f:
                f.write(text)
            os.replace(tmp, path)
        except BaseException:
            Path(tmp).unlink(missing_ok=True)
            raise
    except OSError as e:
        raise IoError(f"cannot write: {e.strerror or e}", source=str(path)) from e
