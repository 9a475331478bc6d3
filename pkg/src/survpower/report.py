"""Request validation, dispatch, and stable JSON rendering.

The CLI and the HTTP service both funnel through ``dispatch`` and ``render``,
so the two surfaces emit byte-identical documents for identical payloads.
Result documents keep a fixed field order and echo their normalized inputs;
re-submitting an echo reproduces the document exactly.
"""

import json
import math

from . import __version__
from . import design_effect as de
from . import formulas, simulation
from .errors import (
    CalibrationError,
    ConvergenceError,
    DomainError,
    InfiniteVarianceError,
    PayloadError,
    SeparationError,
)
from .formulas import DesignInputs
from .overlap import min_phi_for_finite_variance, overlap_category, solve_ab
from .sensitivity import SensitivityInputs, epsilon_bound

COMMANDS = ("rct", "obs", "vif", "bounds", "curve", "simulate")

_NUM = "number"
_INT = "integer"
_STR = "string"
_BOOL = "boolean"

# command -> ordered {field: (type, default)}; _REQUIRED marks no-default fields,
# group constraints are handled in _normalize
_REQUIRED = object()
_OPTIONAL = object()

_DESIGN_FIELDS = {
    "r": (_NUM, _REQUIRED),
    "hr": (_NUM, _OPTIONAL),
    "tau0": (_NUM, _OPTIONAL),
    "d": (_NUM, _OPTIONAL),
    "d1": (_NUM, _OPTIONAL),
    "d0": (_NUM, _OPTIONAL),
    "alpha": (_NUM, 0.05),
    "power": (_NUM, 0.8),
    "sides": (_INT, 1),
}

_SCHEMAS = {
    "rct": dict(_DESIGN_FIELDS),
    "obs": {
        **_DESIGN_FIELDS,
        "phi": (_NUM, _REQUIRED),
        "scheme": (_STR, "ipw"),
        "rho1": (_NUM, _OPTIONAL),
        "rho0": (_NUM, _OPTIONAL),
        "gamma": (_NUM, _OPTIONAL),
        "n_draws": (_INT, de.DEFAULT_DRAWS),
        "seed": (_INT, 0),
    },
    "vif": {
        "r": (_NUM, _REQUIRED),
        "phi": (_NUM, _REQUIRED),
        "scheme": (_STR, "ipw"),
        "n_draws": (_INT, de.DEFAULT_DRAWS),
        "seed": (_INT, 0),
    },
    "bounds": {
        **_DESIGN_FIELDS,
        "phi": (_NUM, _REQUIRED),
        "rho1": (_NUM, 0.5),
        "rho0": (_NUM, 0.5),
        "gamma": (_NUM, _OPTIONAL),
    },
    "curve": {
        "sweep": (_STR, _REQUIRED),
        "from": (_NUM, _REQUIRED),
        "to": (_NUM, _REQUIRED),
        "points": (_INT, 15),
        **_DESIGN_FIELDS,
        "phi": (_NUM, _OPTIONAL),
    },
    "simulate": {
        "kind": (_STR, "rct"),
        "r": (_NUM, _REQUIRED),
        "hr": (_NUM, _OPTIONAL),
        "tau0": (_NUM, _OPTIONAL),
        "phi": (_NUM, _OPTIONAL),
        "scheme": (_STR, "ipw"),
        "formula": (_STR, "proposed"),
        "m": (_INT, 100_000),
        "b": (_INT, 1000),
        "alpha": (_NUM, 0.05),
        "power": (_NUM, 0.8),
        "sides": (_INT, 1),
        "censor_treated": (_NUM, 0.0),
        "censor_control": (_NUM, 0.0),
        "control_survival": (_NUM, 0.2),
        "seed": (_INT, 0),
        "budget_seconds": (_NUM, _OPTIONAL),
        "n_override": (_INT, _OPTIONAL),
        "keep_taus": (_BOOL, False),
        "taus_csv": (_STR, _OPTIONAL),
    },
}


def _type_ok(kind, value):
    if kind == _NUM:
        return isinstance(value, (int, float)) and not isinstance(value, bool)
    if kind == _INT:
        return isinstance(value, int) and not isinstance(value, bool)
    if kind == _STR:
        return isinstance(value, str)
    if kind == _BOOL:
        return isinstance(value, bool)
    return False


def _normalize(command, payload):
    """Schema-validate a payload: unknown fields rejected, defaults applied,
    effect size and event rates normalized. Returns the echo dict."""
    if command not in _SCHEMAS:
        raise PayloadError(f"unknown command {command!r}", field="command")
    if not isinstance(payload, dict):
        raise PayloadError("payload must be a JSON object", field="(body)")
    schema = _SCHEMAS[command]
    for key in payload:
        if key not in schema:
            raise PayloadError(f"unknown field {key!r}", field=key)
    out = {}
    for key, (kind, default) in schema.items():
        if key in payload:
            value = payload[key]
            if not _type_ok(kind, value):
                raise PayloadError(f"field {key!r} must be a {kind}", field=key)
            out[key] = value
        elif default is _REQUIRED:
            raise PayloadError(f"missing required field {key!r}", field=key)
        elif default is not _OPTIONAL:
            out[key] = default

    if "hr" in schema:
        has_hr, has_tau = "hr" in out, "tau0" in out
        if has_hr == has_tau:
            raise PayloadError(
                "exactly one of 'hr' or 'tau0' is required",
                field="hr" if has_hr else "tau0",
            )
        if has_hr and not out["hr"] > 0:
            raise PayloadError("'hr' must be positive", field="hr")
    if "d" in schema:
        if "d1" in out or "d0" in out:
            if not ("d1" in out and "d0" in out):
                raise PayloadError(
                    "arm-specific event rates need both 'd1' and 'd0'",
                    field="d1" if "d1" not in out else "d0",
                )
            out.pop("d", None)  # arm-specific wins when both appear
        elif "d" in out:
            out["d1"] = out["d0"] = out.pop("d")
        else:
            raise PayloadError(
                "event rates required: 'd' or both of 'd1'/'d0'", field="d"
            )
    # canonical key order, so an echo and its replay render identically
    return {key: out[key] for key in schema if key in out}


def _tau0(echo):
    return math.log(echo["hr"]) if "hr" in echo else echo["tau0"]


def _design(echo):
    return DesignInputs(
        r=echo["r"], tau0=_tau0(echo), d1=echo["d1"], d0=echo["d0"],
        alpha=echo["alpha"], power=echo["power"], sides=echo["sides"],
    )


def _size_args(design):
    return design.tau0, design.alpha, design.power, design.sides


def _comparators(design, beta=None):
    d = design.d
    out = {
        "schoenfeld_n": formulas.sample_size(
            formulas.v_schoenfeld(design.r).to_units(d), *_size_args(design)
        ),
        "freedman_n": formulas.sample_size(
            formulas.v_freedman(design.r, design.tau0).to_units(d), *_size_args(design)
        ),
    }
    if beta is not None:
        out["hsieh_lavori_n"] = formulas.sample_size(
            formulas.v_hsieh_lavori(design.r, beta).to_units(d), *_size_args(design)
        )
    return out


def _report_core(echo, design, v_units, n, vif=None):
    doc = {
        "inputs": echo,
        "variance_units": v_units,
        "n": n,
        "expected_events": n * design.d,
        "achieved_power": formulas.power_at_n(v_units, *(
            design.tau0, design.alpha, n, design.sides)) if v_units else None,
    }
    if vif is not None:
        doc["vif"] = vif
    return doc


def _cmd_rct(echo):
    design = _design(echo)
    v = formulas.v_rct(design.r, design.tau0, design.d1, design.d0)
    n = formulas.sample_size(v, *_size_args(design))
    doc = _report_core(echo, design, v.value, n)
    doc["comparators"] = _comparators(design)
    doc["engine_version"] = __version__
    return doc


def _sensitivity_block(echo, design, beta):
    sens = SensitivityInputs(
        rho1=echo.get("rho1", 0.5),
        rho0=echo.get("rho0", 0.5),
        gamma=echo.get("gamma"),
    )
    if beta.a <= 2.0 or beta.b <= 2.0:
        return None  # weight variances do not exist; no bound computable
    eb = epsilon_bound(design, beta, sens)
    return {
        "rho1": sens.rho1,
        "rho0": sens.rho0,
        "gamma": sens.gamma,
        "m1": eb.m1,
        "m2": eb.m2,
        "m3": eb.m3,
        "m4": eb.m4,
        "bound": eb.bound,
        "n_low": eb.n_low,
        "n_high": eb.n_high,
        "clamped": eb.clamped,
    }


def _cmd_obs(echo):
    design = _design(echo)
    beta = solve_ab(design.r, echo["phi"])
    v_rct = formulas.v_rct(design.r, design.tau0, design.d1, design.d0)
    seed_used = None
    kappa_se = None
    if echo["scheme"] == "ipw":
        v = formulas.v_obs(design.r, design.tau0, design.d1, design.d0, beta)
        n = formulas.sample_size(v, *_size_args(design))
        vif = v.value / v_rct.value
        v_units = v.value
    else:
        scheme = de.scheme_by_name(echo["scheme"], design.r)
        kappa = de.kappa_de_monte_carlo(
            design.r, echo["phi"], scheme,
            n_draws=echo["n_draws"], seed=echo["seed"],
        )
        raw = formulas.sample_size_raw(v_rct, *_size_args(design))
        n = de.sample_size_with_vif(raw, kappa.value)
        vif = kappa.value
        kappa_se = kappa.mc_std_error
        v_units = kappa.value * v_rct.value
        seed_used = echo["seed"]
    doc = _report_core(echo, design, v_units, n, vif=vif)
    if kappa_se is not None:
        doc["vif_mc_std_error"] = kappa_se
    doc["overlap"] = {
        "phi": echo["phi"],
        "category": overlap_category(echo["phi"]),
        "a": beta.a,
        "b": beta.b,
        "min_phi": min_phi_for_finite_variance(design.r),
    }
    doc["comparators"] = _comparators(design, beta)
    sens = _sensitivity_block(echo, design, beta)
    if sens is not None and echo["scheme"] == "ipw":
        doc["sensitivity"] = sens
    doc["engine_version"] = __version__
    if seed_used is not None:
        doc["seed"] = seed_used
    return doc


def _cmd_vif(echo):
    if not (0.0 < echo["phi"] < 1.0):
        raise DomainError(f"phi must lie in (0, 1), got {echo['phi']!r}")
    scheme = de.scheme_by_name(echo["scheme"], echo["r"])
    kappa = de.kappa_de_monte_carlo(
        echo["r"], echo["phi"], scheme, n_draws=echo["n_draws"], seed=echo["seed"]
    )
    doc = {
        "inputs": echo,
        "kappa": kappa.value,
        "mc_std_error": kappa.mc_std_error,
        "n_draws": kappa.n_draws,
        "seed": kappa.seed,
    }
    if echo["scheme"] == "ipw":
        beta = solve_ab(echo["r"], echo["phi"])
        doc["kappa_analytic"] = de.kappa_ipw_analytic(echo["r"], beta.a, beta.b)
    doc["engine_version"] = __version__
    return doc


def _cmd_bounds(echo):
    design = _design(echo)
    beta = solve_ab(design.r, echo["phi"])
    sens = SensitivityInputs(rho1=echo["rho1"], rho0=echo["rho0"],
                             gamma=echo.get("gamma"))
    eb = epsilon_bound(design, beta, sens)
    return {
        "inputs": echo,
        "m1": eb.m1,
        "m2": eb.m2,
        "m3": eb.m3,
        "m4": eb.m4,
        "bound": eb.bound,
        "n": eb.n,
        "n_low": eb.n_low,
        "n_high": eb.n_high,
        "clamped": eb.clamped,
        "engine_version": __version__,
    }


def _curve_point(echo, design, phi):
    if phi is None:
        v = formulas.v_rct(design.r, design.tau0, design.d1, design.d0)
    else:
        v = formulas.v_obs(design.r, design.tau0, design.d1, design.d0,
                           solve_ab(design.r, phi))
    n = formulas.sample_size(v, *_size_args(design))
    power = formulas.power_at_n(v.value, design.tau0, design.alpha, n, design.sides)
    return v.value, n, power


def _cmd_curve(echo):
    sweep = echo["sweep"]
    if sweep not in ("phi", "hr", "n"):
        raise PayloadError("sweep must be one of 'phi', 'hr', 'n'", field="sweep")
    lo, hi, k = echo["from"], echo["to"], echo["points"]
    if k < 2:
        raise PayloadError("points must be at least 2", field="points")
    if not (hi > lo):
        raise PayloadError("'to' must exceed 'from'", field="to")
    xs = [lo + (hi - lo) * i / (k - 1) for i in range(k)]
    design = _design(echo)
    phi = echo.get("phi")
    points = []
    for x in xs:
        if sweep == "phi":
            _, n, power = _curve_point(echo, design, x)
            points.append({"phi": x, "n": n, "power": power})
        elif sweep == "hr":
            dd = DesignInputs(r=design.r, tau0=math.log(x), d1=design.d1,
                              d0=design.d0, alpha=design.alpha,
                              power=design.power, sides=design.sides)
            _, n, power = _curve_point(echo, dd, phi)
            points.append({"hr": x, "n": n, "power": power})
        else:
            v, _, _ = _curve_point(echo, design, phi)
            n = int(round(x))
            power = formulas.power_at_n(v, design.tau0, design.alpha, n,
                                        design.sides)
            points.append({"n": n, "power": power})
    return {"inputs": echo, "points": points, "engine_version": __version__}


def _cmd_simulate(echo):
    spec = simulation.ScenarioSpec(
        kind=echo["kind"],
        target_r=echo["r"],
        target_hr=echo["hr"] if "hr" in echo else math.exp(echo["tau0"]),
        target_phi=echo.get("phi"),
        scheme=echo["scheme"],
        formula=echo["formula"],
        m=echo["m"],
        b=echo["b"],
        alpha=echo["alpha"],
        power=echo["power"],
        sides=echo["sides"],
        censor_treated=echo["censor_treated"],
        censor_control=echo["censor_control"],
        control_survival=echo["control_survival"],
        seed=echo["seed"],
        budget_seconds=echo.get("budget_seconds"),
        n_override=echo.get("n_override"),
        keep_taus=echo["keep_taus"] or "taus_csv" in echo,
    )
    result = simulation.run_scenario(spec)
    taus = result.pop("taus", None)
    if "taus_csv" in echo and taus is not None:
        with open(echo["taus_csv"], "w", encoding="utf-8") as fh:
            fh.write("replicate,tau_hat\n")
            for i, t in enumerate(taus):
                fh.write(f"{i},{t!r}\n")
    elif echo["keep_taus"] and taus is not None:
        result["taus"] = taus
    return {"inputs": echo, "result": result, "engine_version": __version__}


_HANDLERS = {
    "rct": _cmd_rct,
    "obs": _cmd_obs,
    "vif": _cmd_vif,
    "bounds": _cmd_bounds,
    "curve": _cmd_curve,
    "simulate": _cmd_simulate,
}


def command_schema(command):
    """Field schema of a command (read-only view for front ends)."""
    return _SCHEMAS.get(command, {})


def dispatch(command, payload):
    """Validate and route one request; returns the result document."""
    echo = _normalize(command, payload)
    return _HANDLERS[command](echo)


def render(doc, pretty=False):
    """Serialize a document to bytes; the single renderer for CLI and HTTP."""
    if pretty:
        text = json.dumps(doc, indent=2, allow_nan=False)
    else:
        text = json.dumps(doc, separators=(",", ":"), allow_nan=False)
    return (text + "\n").encode("utf-8")


def error_document(exc):
    """Structured error body plus (exit_code, http_status) for an exception."""
    if isinstance(exc, PayloadError):
        code, exit_code, status = "validation", 2, 400
    elif isinstance(exc, InfiniteVarianceError):
        code, exit_code, status = "infinite-variance", 3, 422
    elif isinstance(exc, DomainError):
        code, exit_code, status = "numeric-domain", 3, 422
    elif isinstance(exc, (CalibrationError, SeparationError)):
        code, exit_code, status = "convergence", 4, 422
    elif isinstance(exc, ConvergenceError):
        code, exit_code, status = "convergence", 4, 422
    else:
        code, exit_code, status = "internal", 1, 500
    doc = {
        "code": code,
        "message": str(exc),
        "offending_field": getattr(exc, "field", None),
    }
    if isinstance(exc, InfiniteVarianceError):
        doc["min_phi"] = exc.min_phi
    return doc, exit_code, status


def health_document():
    return {"status": "ok", "version": __version__}
