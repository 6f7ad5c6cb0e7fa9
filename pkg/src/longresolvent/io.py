"""Artifact files: a single JSON-shaped text format for every object kind.

Complex numbers are stored as [re, im] pairs, matrices as row-major nested
lists of pairs.  Every payload carries enough dimension data to give empty
matrices an unambiguous shape.  Loading re-validates class invariants, so
a file holding, say, an indefinite pencil coefficient is rejected."""

import json

import numpy as np

from .aglerkit import KneseWitness
from .bessmertnyi import LongResolventPencil, PencilDecomposition
from .cayley import TupleOfMatrices
from .errors import ArtifactError, LongResolventError
from .herglotz import HerglotzRealization
from .polyalg import MatrixPolynomial
from .realization import GivoneRoesserRealization
from .sampling import SampleReport

__all__ = ["FORMAT_VERSION", "save_artifact", "load_artifact",
           "dumps_artifact", "loads_artifact", "artifact_kind"]

FORMAT_VERSION = "1"


def _mat_to_lists(M):
    M = np.atleast_2d(np.asarray(M, dtype=complex))
    return [[[float(v.real), float(v.imag)] for v in row] for row in M]


def _mat_from_lists(data, rows, cols, what):
    try:
        out = np.zeros((rows, cols), dtype=complex)
        if rows and cols:
            arr = np.asarray(data, dtype=float)
            if arr.shape != (rows, cols, 2):
                raise ValueError(f"expected shape {(rows, cols, 2)}")
            out = arr[..., 0] + 1j * arr[..., 1]
        return out
    except (TypeError, ValueError) as exc:
        raise ArtifactError(f"bad matrix for {what}: {exc}") from exc


def _poly_to_doc(p: MatrixPolynomial):
    return {
        "rows": p.rows,
        "cols": p.cols,
        "terms": [{"exponents": list(a), "matrix": _mat_to_lists(m)}
                  for a, m in p.sorted_terms()],
    }


def _poly_from_doc(doc, d):
    terms = {}
    for item in doc["terms"]:
        alpha = tuple(int(x) for x in item["exponents"])
        terms[alpha] = _mat_from_lists(item["matrix"], doc["rows"],
                                       doc["cols"], "polynomial term")
    return MatrixPolynomial.from_terms(d, terms, rows=doc["rows"],
                                       cols=doc["cols"])


def artifact_kind(obj):
    if isinstance(obj, LongResolventPencil):
        return "pencil"
    if isinstance(obj, GivoneRoesserRealization):
        return "gr_realization"
    if isinstance(obj, HerglotzRealization):
        return "herglotz_realization"
    if isinstance(obj, PencilDecomposition):
        return "pencil_decomposition"
    if isinstance(obj, KneseWitness):
        return "knese_witness"
    if isinstance(obj, TupleOfMatrices):
        return "matrix_tuple"
    if isinstance(obj, (list, tuple)) and obj and all(
            isinstance(x, MatrixPolynomial) for x in obj):
        return "matrix_polynomial_set"
    if isinstance(obj, SampleReport):
        return "report"
    if isinstance(obj, (list, tuple)) and all(
            isinstance(x, SampleReport) for x in obj):
        return "report"
    raise ArtifactError(f"no artifact kind for {type(obj).__name__}")


def _payload(obj, kind):
    if kind == "pencil":
        return {
            "d": obj.d, "n": obj.n, "m": obj.m, "tag": obj.tag,
            "coefficients": [_mat_to_lists(c) for c in obj.coefficients],
        }
    if kind == "gr_realization":
        return {
            "d": obj.d, "n": obj.n, "state_dims": list(obj.state_dims),
            "U": _mat_to_lists(obj.U),
            "flags": {"unitary": obj.unitary, "hermitian": obj.hermitian,
                      "real": obj.real},
        }
    if kind == "herglotz_realization":
        return {
            "d": obj.d, "n": obj.n, "state_dims": list(obj.state_dims),
            "beta": _mat_to_lists(obj.beta), "W": _mat_to_lists(obj.W),
            "V": _mat_to_lists(obj.V),
        }
    if kind == "pencil_decomposition":
        return {
            "pencil": _payload(obj.pencil, "pencil"),
            "factors": [{"rows": Y.shape[0], "matrix": _mat_to_lists(Y)}
                        for Y in obj.factors],
        }
    if kind == "knese_witness":
        return {
            "d": obj.d, "n": obj.n,
            "p": _poly_to_doc(obj.p), "q": _poly_to_doc(obj.q),
            "psis": [_poly_to_doc(psi) for psi in obj.psis],
        }
    if kind == "matrix_tuple":
        return {
            "count": obj.d, "size": obj.size,
            "matrices": [_mat_to_lists(m) for m in obj.mats],
        }
    if kind == "matrix_polynomial_set":
        return {"d": obj[0].d, "polys": [_poly_to_doc(p) for p in obj]}
    if kind == "report":
        reports = [obj] if isinstance(obj, SampleReport) else list(obj)
        return {"reports": [r.to_dict() for r in reports]}
    raise ArtifactError(f"unknown kind {kind!r}")


def dumps_artifact(obj) -> str:
    kind = artifact_kind(obj)
    doc = {
        "format_version": FORMAT_VERSION,
        "kind": kind,
        "payload": _payload(obj, kind),
    }
    return json.dumps(doc, sort_keys=True, indent=1) + "\n"


def save_artifact(path, obj):
    text = dumps_artifact(obj)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)


def _build(kind, payload):
    if kind == "pencil":
        d, n, m = int(payload["d"]), int(payload["n"]), int(payload["m"])
        s = n + m
        coeffs = [_mat_from_lists(c, s, s, f"A_{i}")
                  for i, c in enumerate(payload["coefficients"])]
        return LongResolventPencil(d, n, m, tuple(coeffs), payload["tag"])
    if kind == "gr_realization":
        d, n = int(payload["d"]), int(payload["n"])
        dims = tuple(int(v) for v in payload["state_dims"])
        s = int(sum(dims)) + n
        U = _mat_from_lists(payload["U"], s, s, "U")
        flags = payload.get("flags", {})
        return GivoneRoesserRealization(
            d, n, dims, U,
            unitary=bool(flags.get("unitary", True)),
            hermitian=bool(flags.get("hermitian", False)),
            real=bool(flags.get("real", False)))
    if kind == "herglotz_realization":
        d, n = int(payload["d"]), int(payload["n"])
        dims = tuple(int(v) for v in payload["state_dims"])
        m = int(sum(dims))
        return HerglotzRealization(
            d, n, dims,
            _mat_from_lists(payload["beta"], n, n, "beta"),
            _mat_from_lists(payload["W"], m, m, "W"),
            _mat_from_lists(payload["V"], m, n, "V"))
    if kind == "pencil_decomposition":
        pcl = _build("pencil", payload["pencil"])
        factors = tuple(
            _mat_from_lists(f["matrix"], int(f["rows"]), pcl.size,
                            "factor")
            for f in payload["factors"])
        return PencilDecomposition(pcl, factors)
    if kind == "knese_witness":
        d = int(payload["d"])
        p = _poly_from_doc(payload["p"], d)
        q = _poly_from_doc(payload["q"], d)
        psis = [_poly_from_doc(doc, d) for doc in payload["psis"]]
        return KneseWitness.build(p, q, psis)
    if kind == "matrix_tuple":
        size = int(payload["size"])
        mats = tuple(_mat_from_lists(m, size, size, "tuple entry")
                     for m in payload["matrices"])
        return TupleOfMatrices(mats)
    if kind == "matrix_polynomial_set":
        d = int(payload["d"])
        return [_poly_from_doc(doc, d) for doc in payload["polys"]]
    if kind == "report":
        return payload["reports"]
    raise ArtifactError(f"unknown artifact kind {kind!r}")


def loads_artifact(text):
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ArtifactError(f"not valid JSON: {exc}") from exc
    if not isinstance(doc, dict) or "kind" not in doc or "payload" not in doc:
        raise ArtifactError("missing kind/payload")
    if doc.get("format_version") != FORMAT_VERSION:
        raise ArtifactError(
            f"unsupported format_version {doc.get('format_version')!r}")
    try:
        return _build(doc["kind"], doc["payload"])
    except ArtifactError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise ArtifactError(f"malformed payload: {exc}") from exc
    except LongResolventError as exc:
        raise ArtifactError(
            f"loaded object violates its invariants: {exc}") from exc


def load_artifact(path):
    with open(path, "r", encoding="utf-8") as fh:
        return loads_artifact(fh.read())
