"""Run archives: deterministic file layout with a content-hash manifest."""
from __future__ import annotations

import hashlib
import json
import os
from dataclasses import dataclass, field

from .errors import IoFailure

FORMAT = "critlab.archive/1"


def fmt(x) -> str:
    """Scalars rendered with 12 significant digits."""
    return f"{float(x):.12g}"


@dataclass
class RunArchive:
    """Named file contents to be written together with a manifest."""

    config_text: str = ""
    files: dict = field(default_factory=dict)

    def add(self, name: str, content: str) -> None:
        self.files[name] = content

    def add_json(self, name: str, obj) -> None:
        self.files[name] = json.dumps(obj, sort_keys=True, indent=1)


def sweep_csv(records) -> str:
    """CSV for sweep records; the comment line documents the columns."""
    lines = ["# a,gap,energy,eps,mu,errL2,errSup,iters"]
    for r in records:
        lines.append(
            ",".join(
                [
                    fmt(r.a),
                    fmt(r.gap),
                    fmt(r.energy),
                    fmt(r.eps),
                    fmt(r.mu),
                    fmt(r.profile_err_l2),
                    fmt(r.profile_err_sup),
                    str(r.iterations),
                ]
            )
        )
    return "\n".join(lines) + "\n"


def grid_function_csv(u) -> str:
    """CSV of (node, value) rows including the zero boundary entries."""
    lines = ["# node,value"]
    full = u.full()
    for x, v in zip(u.grid.nodes, full):
        lines.append(f"{fmt(x)},{fmt(v)}")
    return "\n".join(lines) + "\n"


def scaling_fit_json(fit) -> dict:
    def law(f):
        return {
            "exponent": f.exponent,
            "exponent_halfwidth": f.exponent_halfwidth,
            "prefactor": f.prefactor,
            "predicted_exponent": f.predicted_exponent,
            "predicted_prefactor": f.predicted_prefactor,
            "exponent_ok": f.exponent_ok,
            "prefactor_ok": f.prefactor_ok,
        }

    return {
        "format": "critlab.fit/1",
        "energy": law(fit.energy),
        "eps": law(fit.eps),
        "n_used": fit.n_used,
        "gap_decades": fit.gap_decades,
    }


def write_outputs(archive: RunArchive, out_dir: str) -> dict:
    """Write every file plus manifest.json; returns the manifest dict."""
    try:
        os.makedirs(out_dir, exist_ok=True)
        names = {}
        items = dict(archive.files)
        if archive.config_text:
            items["config.cfg"] = archive.config_text
        for name in sorted(items):
            content = items[name]
            data = content.encode() if isinstance(content, str) else content
            path = os.path.join(out_dir, name)
            os.makedirs(os.path.dirname(path) or out_dir, exist_ok=True)
            with open(path, "wb") as fh:
                fh.write(data)
            names[name] = hashlib.sha256(data).hexdigest()
        manifest = {"format": FORMAT, "files": names}
        with open(os.path.join(out_dir, "manifest.json"), "w") as fh:
            json.dump(manifest, fh, sort_keys=True, indent=1)
        return manifest
    except OSError as exc:
        raise IoFailure(f"cannot write run archive to {out_dir!r}: {exc}") from exc
