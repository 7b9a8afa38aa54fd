# engine.py
import logging
import time
from typing import Any, Callable, Dict, List, Optional

from src.core.closedform import ClosedFormEngine
from src.core.errors import ComputationError, ConfigurationError, EngineError
from src.core.higher_loops import HigherLoopEngine
from src.core.model import Family, HypergeometricModel, SpectralCurve, build_curve
from src.core.oracle import TauFunctionOracle
from src.core.rational import RationalFunction
from src.core.scalars import rational_to_str
from src.core.series import RATIONALS
from src.core.trengine import MultiDifferential, TopologicalRecursion
from src.core import verify
from src.models.run_models import (
    CheckReport,
    HurwitzTarget,
    QuasipolyTarget,
    ResultRecord,
    RunConfig,
    RunOutput,
    TRTarget,
    Verdict,
    VerifyTarget,
    WgnTarget,
)
from src.storage.storage import AbstractStorage, parts_key
from src.utils.constants import DEFAULT_PRECISION, DEFAULT_SEED, PROJECTION_CONTROLS, VERSION, suite_models

logger = logging.getLogger(__name__)


def k_label(k) -> str:
    return ",".join(str(part) for part in k)


class ModelContext:
    """Engines of one model, built lazily and shared between targets."""

    def __init__(self, model: HypergeometricModel, mode: str, precision: int, seed: int):
        self.model = model
        self.mode = mode
        self.precision = precision
        self.seed = seed
        self._curve: Optional[SpectralCurve] = None
        self._tr: Dict[str, TopologicalRecursion] = {}
        self.oracle = TauFunctionOracle(model)
        self.closed = ClosedFormEngine(model, seed)
        self.higher = HigherLoopEngine(model, seed)

    @property
    def curve(self) -> SpectralCurve:
        if self._curve is None:
            self._curve = build_curve(self.model, self.mode, self.precision, allow_numeric_fallback=True)
        return self._curve

    @property
    def mode_key(self) -> str:
        curve = self.curve
        return "exact" if curve.scalars.exact else f"numeric:{curve.scalars.dps}"

    def tr(self, method: str = "auto") -> TopologicalRecursion:
        if method not in self._tr:
            self._tr[method] = TopologicalRecursion(self.curve, method)
        return self._tr[method]


class EngineFacade:
    def __init__(
        self,
        storage: AbstractStorage,
        precision: int = DEFAULT_PRECISION,
        seed: int = DEFAULT_SEED,
        database=None,
    ):
        self._storage = storage
        self._database = database
        self.precision = precision
        self.seed = seed

    # ------------------------------------------------------------------ run
    def context(self, config: RunConfig) -> ModelContext:
        digits = config.mode.digits if "digits" in config.mode.model_fields_set else self.precision
        seed = config.seed if "seed" in config.model_fields_set else self.seed
        return ModelContext(config.build_model(), config.effective_mode, digits, seed)

    def run(self, config: RunConfig) -> RunOutput:
        """Execute every target of ``config`` in order; fatal engine errors propagate."""
        ctx = self.context(config)
        logger.info("Run for %s: %d targets, mode=%s", ctx.model.name or ctx.model.fingerprint,
                    len(config.targets), ctx.mode)
        results: List[ResultRecord] = []
        reports: List[CheckReport] = []
        handlers: Dict[str, Callable] = {
            "hurwitz": self.run_hurwitz,
            "wgn": self.run_wgn,
            "tr": self.run_tr,
            "verify": self.run_verify,
            "quasipoly": self.run_quasipoly,
        }
        for target in config.targets:
            started = time.perf_counter()
            new_results, new_reports = handlers[target.kind](ctx, target)
            if config.record_timings:
                elapsed = round(time.perf_counter() - started, 3)
                for report in new_reports:
                    report.seconds = elapsed
            results.extend(new_results)
            reports.extend(new_reports)
        meta = {
            "model": ctx.model.fingerprint,
            "name": ctx.model.name,
            "mode": ctx.mode,
            "digits": ctx.precision,
            "seed": ctx.seed,
            "version": VERSION,
        }
        if ctx._curve is not None:
            meta["curve"] = ctx.curve.describe()
        return RunOutput(meta=meta, results=results, reports=sorted(reports, key=CheckReport.sort_key))

    # ------------------------------------------------------------------ numbers
    def hurwitz_number(self, ctx: ModelContext, g: int, k, engine: str = "oracle") -> Any:
        """h_{g;k} as JSON data, served from storage when present."""
        # oracle and closed form are exact in every mode
        base = ctx.mode_key if engine == "trengine" else "exact"
        mode_key = f"{base}/{engine}"
        cached = self._storage.get_number(ctx.model.fingerprint, mode_key, g, k)
        if cached is not None:
            logger.debug("h_{%d;%s} from storage", g, parts_key(k))
            return cached
        k = sorted(k, reverse=True)
        if engine == "oracle":
            value = rational_to_str(ctx.oracle.hurwitz_number(g, k))
        elif engine == "closedform":
            value = rational_to_str(ctx.closed.W_series(g, len(k), max(k))[tuple(k)])
        else:
            table = ctx.tr().expand(g, len(k), max(k))
            value = ctx.curve.scalars.to_json(table[tuple(k)])
        self._storage.save_number(ctx.model.fingerprint, mode_key, g, k, engine, value)
        return value

    def run_hurwitz(self, ctx: ModelContext, target: HurwitzTarget):
        value = self.hurwitz_number(ctx, target.g, target.k, target.engine)
        record = ResultRecord(target="hurwitz", key=k_label(target.k), engine=target.engine,
                              g=target.g, n=len(target.k), value=value)
        return [record], []

    def run_wgn(self, ctx: ModelContext, target: WgnTarget):
        g, n = target.g, target.n
        if target.quantity == "W":
            result = ctx.closed.compute_W(g, n, target.representation, target.k_max)
        elif target.quantity == "H":
            if 2 * g - 2 + n <= 0:
                raise ConfigurationError(f"H_{{{g},{n}}} is defined for stable (g, n) only")
            result = ctx.closed.compute_H(g, n, target.representation, target.k_max)
        else:
            result = ctx.higher.compute(target.r, g, n, target.method, target.representation, target.k_max)
        record = ResultRecord(
            target="wgn",
            key=result.label,
            engine=result.engine,
            g=g,
            n=n,
            r=result.r,
            value=self._encode(result.value, result.representation),
            values={"pins": [rational_to_str(p) for p in result.pins]} if result.pins else None,
        )
        return [record], []

    def run_tr(self, ctx: ModelContext, target: TRTarget):
        tr = ctx.tr(target.method)
        scalars = ctx.curve.scalars
        records = []
        for (g, n), omega in sorted(tr.table(target.g_max, target.n_max).items()):
            table = tr.expand(g, n, target.k_max)
            records.append(ResultRecord(
                target="tr",
                key=f"omega_{g},{n}",
                engine="trengine",
                g=g,
                n=n,
                value=omega.to_json(),
                values={k_label(k): scalars.to_json(v) for k, v in table.items()},
            ))
        return records, []

    # ------------------------------------------------------------------ checks
    def verify_model(self, model: HypergeometricModel, mode: str, target: VerifyTarget,
                     seed: Optional[int] = None, tr_checks: bool = True) -> List[CheckReport]:
        """Loop equations, projection, quadratic loop, cross-engine and TR in-chart checks of one model."""
        seed = self.seed if seed is None else seed
        try:
            curve = build_curve(model, mode, self.precision, allow_numeric_fallback=True)
        except EngineError as exc:
            return [verify.skip_report("curve", model, exc)]
        reports = verify.check_loop_equations(model, curve, target.g_max, target.n_max, target.r_max, seed)
        for g in range(target.g_max + 1):
            for m in range(target.n_max):
                if g or m:
                    reports.extend(verify.check_quadratic_loop(model, curve, g, m, seed))
        cells = verify.stable_range(target.g_max, target.n_max)
        if model.family is not Family.RAW:
            for g, n in cells:
                reports.extend(verify.check_projection(model, curve, g, n, seed))
        tr = None
        try:
            tr = TopologicalRecursion(curve)
        except EngineError as exc:
            reports.append(verify.skip_report("tr", model, exc))
        for g, n in [(0, 1), (0, 2)] + cells:
            reports.append(verify.cross_check(model, curve, g, n, target.k_max, tr=tr))
        if tr is not None and tr_checks:
            reports.extend(verify.check_tr_loop_equations(tr, target.g_max, target.n_max))
        return reports

    def negative_controls(self, seed: int) -> List[CheckReport]:
        """Checks that must fail, each reported as pass when it does."""
        suite = suite_models()
        reports = []
        for name in PROJECTION_CONTROLS:
            model = suite[name].to_model()
            curve = build_curve(model, "exact", self.precision, allow_numeric_fallback=True)
            reports.append(verify.check_projection_control(model, curve, 1, 1, seed))
        model = suite["simple"].to_model()
        curve = build_curve(model, "exact", self.precision)
        point = curve.critical_points[0].exact_point
        corrupted = verify.check_loop_equations(model, curve, 1, 1, 1, seed, corrupt=verify.corrupt_with_pole(point))
        caught = any(r.failed for r in corrupted)
        reports.append(verify.make_report("control_corrupted_w", model, Verdict.PASS if caught else Verdict.FAIL,
                                      witness={"failing_reports": sum(r.failed for r in corrupted)}))
        values = dict(ClosedFormEngine(model, seed).W_series(1, 1, 6))
        values[(6,)] = values[(6,)] + 1
        fit, _ = verify.quasipoly_fit(model, curve, 1, 1, 6, values=values)
        reports.append(verify.make_report("control_corrupted_quasipoly", model,
                                      Verdict.PASS if fit.failed else Verdict.FAIL, witness=fit.witness))
        return reports

    def run_verify(self, ctx: ModelContext, target: VerifyTarget):
        if target.suite == "model":
            reports = self.verify_model(ctx.model, ctx.mode, target, ctx.seed)
            models = [ctx.model.fingerprint]
        else:
            reports = []
            models = []
            for name, spec in sorted(suite_models().items()):
                model = spec.to_model()
                models.append(model.fingerprint)
                reports.extend(self.verify_model(model, "numeric" if spec.uses_decimals() else "exact",
                                                 target, ctx.seed))
            reports.extend(self.negative_controls(ctx.seed))
            reports.extend(verify.check_lemma_divisibility())
        for report in reports:
            self._storage.save_report(report.model, report)
        verdict = verify.merge_verdicts(reports)
        summary = ResultRecord(
            target="verify",
            key=target.suite,
            engine="verify",
            value={v.value: sum(r.verdict is v for r in reports) for v in Verdict},
            values={"models": models},
            verdict=verdict,
        )
        return [summary], reports

    def run_quasipoly(self, ctx: ModelContext, target: QuasipolyTarget):
        report, polynomials = verify.quasipoly_fit(ctx.model, ctx.curve, target.g, target.n, target.k_max,
                                                   target.basis)
        values = None
        if polynomials is not None:
            values = {
                k_label(i): {k_label(e): rational_to_str(c) for e, c in poly.items()}
                for i, poly in polynomials.items()
            }
        record = ResultRecord(target="quasipoly", key=f"{target.basis};{target.g},{target.n}", engine="closedform",
                              g=target.g, n=target.n, values=values, verdict=report.verdict)
        return [record], [report]

    # ------------------------------------------------------------------ maintenance
    def database_info(self) -> Dict[str, Any]:
        if self._database is None:
            return {"status": "error", "message": "no database configured"}
        return self._database.get_database_info()

    def reset_database(self) -> Dict[str, Any]:
        if self._database is None:
            return {"status": "error", "message": "no database configured"}
        return self._database.reset_tables()

    # ------------------------------------------------------------------ encoding
    @staticmethod
    def _encode(value, representation: str):
        if representation == "series":
            return {k_label(k): RATIONALS.to_json(v) for k, v in value.items()}
        if isinstance(value, RationalFunction):
            return str(value.frac.as_expr())
        if isinstance(value, MultiDifferential):
            return value.to_json()
        try:
            return str(value.as_expr())
        except AttributeError:
            raise ComputationError(f"cannot encode a {type(value).__name__} value")
