import hashlib
import json
import logging
import math
import os
import tempfile
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

from artin_deligne import cover as cover_mod
from artin_deligne import links, standard_trees
from artin_deligne.acylindricity import FT_METHOD, acyl_constants, fellow_travel_length, gallery_constant, star_geodesic_bound
from artin_deligne.core import GeometryError
from artin_deligne.defining_graph import DefiningGraph, classify, parse, serialize
from artin_deligne.metric_synth import HYPERBOLIC, MetricParams, build_params
from artin_deligne.params_loader import RunConfig
from artin_deligne.ph_complex import BUILDERS, PHComplex, from_document

logger = logging.getLogger(__name__)

L0 = 1.0
N0 = 1
NEGATIVE_CONTROL_SCALE = 10.0


def load_graph(path: Path) -> DefiningGraph:
    with open(path, "r", encoding="utf-8") as f:
        return parse(f.read())


def load_complex(spec: str) -> PHComplex:
    """A named test complex or a path to a complex document."""
    if spec in BUILDERS:
        return BUILDERS[spec]()
    with open(spec, "r", encoding="utf-8") as f:
        return from_document(f.read())


def vertex_types(g: DefiningGraph) -> List[Tuple[str, ...]]:
    return [()] + [(s,) for s in g.generators] + [tuple(pair) for pair in g.finite_pairs()]


def _type_name(vertex_type: Tuple[str, ...]) -> str:
    return "{" + ",".join(vertex_type) + "}"


def girth_threshold(p: MetricParams) -> float:
    return 2 * math.pi + p.epsilon if p.mode == HYPERBOLIC else 2 * math.pi


def _write_dot(dot_dir: Optional[Path], name: str, text: str):
    if dot_dir is None:
        return
    dot_dir.mkdir(parents=True, exist_ok=True)
    write_atomic(dot_dir / f"{name}.dot", text)


def validate_task(g: DefiningGraph) -> Dict[str, Any]:
    classification = classify(g)
    if not classification.hyperbolic_type:
        logger.warning(f"Input is not of hyperbolic type, witness {classification.hyperbolic_witness}")
    return {"classification": classification.to_record(), "verified": True}


def metric_task(g: DefiningGraph, mode: str, config: RunConfig) -> Tuple[Dict[str, Any], MetricParams]:
    p = build_params(g, mode, config.cycle_length_cap)
    record = p.to_record()
    ok = p.cycle_check is None or p.cycle_check.verified
    if p.certificate is not None:
        ok = ok and p.certificate.verified
        record["doubled_epsilon_violates"] = p.certificate.tight_at(2.0)
    record["verified"] = ok
    return record, p


def links_task(g: DefiningGraph, p: MetricParams, config: RunConfig,
               dot_dir: Optional[Path] = None) -> Dict[str, Any]:
    threshold = girth_threshold(p)
    result = {}
    for vertex_type in vertex_types(g):
        link = links.vertex_link(g, p, vertex_type, config.link_radius, config.exponent_bound)
        cert = links.certify_girth(link, threshold, tol=config.tolerance)
        entry = cert.to_record()
        entry["tree_separation"] = links.tree_separation(link) if len(vertex_type) else None
        result[_type_name(vertex_type)] = entry
        _write_dot(dot_dir, f"link_{''.join(vertex_type) or 'v'}", links.to_dot(link, _type_name(vertex_type)))
    return {"threshold": threshold, "links": result, "verified": all(e["status"] == links.VERIFIED for e in result.values())}


def cone_task(g: DefiningGraph, p: MetricParams, config: RunConfig,
              dot_dir: Optional[Path] = None) -> Dict[str, Any]:
    if p.mode != HYPERBOLIC:
        raise GeometryError("coned links need the hyperbolic metric")
    threshold = girth_threshold(p)
    cases = links.coned_case_bounds(p, g.finite_labels())
    result = {}
    for vertex_type in vertex_types(g)[1:]:
        base = links.vertex_link(g, p, vertex_type, config.link_radius, config.exponent_bound)
        link = links.coned_link(base, p)
        cert = links.certify_girth(link, threshold, cases, tol=config.tolerance)
        result[_type_name(vertex_type)] = cert.to_record()
        _write_dot(dot_dir, f"coned_{''.join(vertex_type)}", links.to_dot(link, "coned " + _type_name(vertex_type)))
    return {
        "threshold": threshold,
        "case_bounds": [case.to_record() for case in cases],
        "links": result,
        "verified": all(e["status"] == links.VERIFIED for e in result.values()),
    }


def trees_task(g: DefiningGraph, dot_dir: Optional[Path] = None) -> Dict[str, Any]:
    cg = standard_trees.build_cut_graph(g)
    _write_dot(dot_dir, "cut_graph", standard_trees.to_dot(cg))
    presentations = {r: standard_trees.stabilizer_presentation(g, r, cg) for r in g.generators}
    refuted = [r for r, pres in presentations.items()
               if any(b.commutation == standard_trees.REFUTED for b in pres.free_basis)]
    return {
        "components": [sorted(str(v) for v in comp) for comp in cg.components],
        "stabilizers": {r: pres.to_record() for r, pres in presentations.items()},
        "verified": not refuted,
    }


def fuzz_task(cover: cover_mod.Cover, trials: int, seed: int, scale: float, start: int,
              progress: bool, cap: int) -> cover_mod.FuzzReport:
    return cover_mod.stability_fuzz(cover, trials, seed, scale, start, progress, cap)


def geodesics_setup(Y: PHComplex, config: RunConfig) -> cover_mod.Cover:
    constants = cover_mod.cover_constants(Y, config.lipschitz_samples, config.seed)
    return cover_mod.Cover(Y, constants)


def geodesics_summary(cover: cover_mod.Cover, config: RunConfig, fuzz: Optional[cover_mod.FuzzReport],
                      control: Optional[cover_mod.FuzzReport]) -> Dict[str, Any]:
    """Everything in the geodesic section except the stability trials."""
    Y = cover.Y
    c = cover.constants
    acute, witness = Y.is_acute()
    properties = cover_mod.check_cover_properties(cover, config.trials, config.seed)
    properties.append(cover_mod.check_angle_corollary(cover, config.trials, config.seed))
    rescaled = Y.rescale(2)
    larger = all(b > a for s, s2 in zip(Y.shapes, rescaled.shapes) for a, b in zip(s.angles, s2.angles))
    B = star_geodesic_bound(Y)
    C = gallery_constant(Y, c.alpha, min(config.trials, 200), config.seed)
    l_ft = fellow_travel_length(c.epsilon0, c.epsilon)
    acyl = acyl_constants(c.epsilon0, L0, N0, l_ft, B, C.C)
    ok = all(check.verified for check in properties) and larger and (fuzz is None or fuzz.verified)
    return {
        "complex": {"name": Y.name, "triangles": len(Y.triangles), "vertices": len(Y.vertices),
                    "acute": acute, "non_acute_triangle": witness},
        "constants": c.to_record(),
        "properties": [check.to_record() for check in properties],
        "rescale_2_increases_angles": larger,
        "stability": None if fuzz is None else fuzz.to_record(),
        "negative_control": None if control is None else control.to_record(),
        "acylindricity": {
            "B": B,
            "gallery_constant": C.to_record(),
            "l_ft": l_ft,
            "l_ft_method": FT_METHOD,
            "constants": acyl.to_record(),
        },
        "verified": ok,
    }


# -- reports -------------------------------------------------------------------

def sanitize(value: Any, digits: int = 17) -> Any:
    """JSON-ready copy: tuples become lists, non-finite floats become None, keys become strings.

    Floats keep `digits` significant digits; 17 or more leaves them untouched.
    """
    if isinstance(value, float):
        if not math.isfinite(value):
            return None
        return value if digits >= 17 else float(f"{value:.{digits}g}")
    if isinstance(value, dict):
        return {str(k): sanitize(v, digits) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [sanitize(v, digits) for v in value]
    return value


def dump_json(record: Dict[str, Any], digits: int = 17) -> str:
    return json.dumps(sanitize(record, digits), indent=2, sort_keys=True, allow_nan=False) + "\n"


def parameter_hash(g: Optional[DefiningGraph], settings: Dict[str, Any]) -> str:
    payload = (serialize(g) if g is not None else "") + dump_json(settings)
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()


def write_atomic(path: Path, text: str):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as f:
            f.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.remove(tmp)
        raise
