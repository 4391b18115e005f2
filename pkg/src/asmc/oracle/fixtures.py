"""Oracle results as JSON fixtures: ``<root>/<potential>/<eps>/{gibbs,spectral}.json``."""

from __future__ import annotations

from pathlib import Path

from ..potential import landscape_summary, make_potential
from ..records import read_artifact, write_artifact
from .grid import gibbs_reference, laplace_partition_function
from .spectral import spectral_solve

# bump when oracle numerics change so old fixtures are rejected
ORACLE_SCHEMA = 1


def fixture_config(kind, potential_id, params, eps, alpha=1.0, n_modes=6):
    cfg = {
        "kind": kind,
        "schema": ORACLE_SCHEMA,
        "potential": potential_id,
        "params": dict(sorted((params or {}).items())),
        "eps": float(eps),
        "alpha": float(alpha),
    }
    if kind == "spectral":
        cfg["n_modes"] = int(n_modes)
    return cfg


def fixture_path(root, potential_id, eps, kind):
    return Path(root) / potential_id / f"{float(eps):g}" / f"{kind}.json"


def compute_gibbs(potential, eps, landscape=None):
    ref = gibbs_reference(potential, eps, landscape)
    body = ref.to_dict()
    body["laplace_Z"] = laplace_partition_function(potential, eps)
    if landscape is not None:
        body["C_K"] = landscape.C_K
        body["C_P"] = ref.C_P(landscape.C_K)
        body["landscape"] = landscape.to_dict()
    return body


def compute_spectral(potential, eps, landscape=None, n_modes=6):
    return spectral_solve(potential, eps, n_modes=n_modes).to_dict(landscape)


def write_fixtures(root, potential_id, eps_values, params=None, alpha=1.0, n_modes=6):
    """Compute and write both fixtures for every temperature; returns the paths."""
    potential = make_potential(potential_id, **(params or {}))
    landscape = landscape_summary(potential, alpha) if potential.n_minima > 1 else None
    paths = []
    for eps in eps_values:
        g = fixture_config("gibbs", potential_id, params, eps, alpha)
        paths.append(write_artifact(fixture_path(root, potential_id, eps, "gibbs"), g, compute_gibbs(potential, eps, landscape)))
        s = fixture_config("spectral", potential_id, params, eps, alpha, n_modes)
        body = compute_spectral(potential, eps, landscape, n_modes)
        paths.append(write_artifact(fixture_path(root, potential_id, eps, "spectral"), s, body))
    return paths


def load_fixture(root, kind, potential_id, eps, params=None, alpha=1.0, n_modes=6):
    """Read a fixture, raising :class:`~asmc.records.StaleArtifactError` on a config mismatch."""
    cfg = fixture_config(kind, potential_id, params, eps, alpha, n_modes)
    return read_artifact(fixture_path(root, potential_id, eps, kind), cfg)
