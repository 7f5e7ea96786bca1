"""FastAPI service wrapping the sum engine; one endpoint per CLI subcommand."""

from __future__ import annotations

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .. import decomp, defset, jobs, lab, spectrum
from ..defset import BudgetExceeded
from ..expsum import companion_sum, sum_over, twist_scan
from ..gf import FieldError, make_extension
from ..ringlang import ParseError
from ..spectrum import CompanionSequence, RecurrenceError
from .models import (
    ClusterModel, CompanionRecord, CompanionRequest, CompanionResponse,
    CountRequest, CountResponse, DensityRequest, DensityResponse,
    EquidistRequest, ExperimentResponse, IntervalRequest, JobModel,
    KloostermanRequest, PaperExamplesRequest, SumRequest, SumResponse,
    TwistsRequest, TwistsResponse, VerifyDecompRequest, VerifyDecompResponse,
    ZetaRequest, ZetaResponse,
)


def _resolve(job: JobModel) -> jobs.JobSpec:
    return jobs.resolve_job(job.to_doc())


def _formula_spec(job: JobModel):
    js = _resolve(job)
    if js.spec is None:
        raise ValueError(f"job kind {js.kind!r} has no formula to evaluate here")
    return js


def _experiment_response(rep: lab.ExperimentReport) -> ExperimentResponse:
    d = rep.to_dict()
    return ExperimentResponse(**d)


def create_app() -> FastAPI:
    app = FastAPI(title="defsum", version="0.1.0",
                  description="Sums over first-order definable subsets of finite fields")

    @app.exception_handler(BudgetExceeded)
    async def _budget_handler(request: Request, exc: BudgetExceeded):
        return JSONResponse(status_code=422, content={
            "detail": str(exc), "type": "budget",
            "estimate": exc.estimate, "budget": exc.budget})

    @app.exception_handler(ParseError)
    async def _parse_handler(request: Request, exc: ParseError):
        return JSONResponse(status_code=400, content={"detail": str(exc), "type": "parse"})

    @app.exception_handler(FieldError)
    async def _field_handler(request: Request, exc: FieldError):
        return JSONResponse(status_code=400, content={"detail": str(exc), "type": "field"})

    @app.exception_handler(RecurrenceError)
    async def _rec_handler(request: Request, exc: RecurrenceError):
        return JSONResponse(status_code=422, content={"detail": str(exc), "type": "recurrence"})

    @app.exception_handler(ValueError)
    async def _value_handler(request: Request, exc: ValueError):
        return JSONResponse(status_code=400, content={"detail": str(exc), "type": "value"})

    @app.get("/v1/health")
    def health():
        return {"status": "ok", "builtins": jobs.builtin_names()}

    @app.get("/v1/jobs")
    def list_jobs():
        return {"builtins": jobs.builtin_names()}

    @app.post("/v1/count", response_model=CountResponse)
    def count(req: CountRequest):
        js = _formula_spec(req.job)
        ctx = make_extension(req.p, req.nu)
        rep = defset.count_report(js.spec.phi, ctx, js.spec.variables,
                                  params=js.spec.params, y=tuple(req.y),
                                  budget=req.budget, workers=req.workers)
        return CountResponse(p=req.p, nu=req.nu, count=rep.count, cost=rep.cost)

    @app.post("/v1/sum", response_model=SumResponse)
    def sum_endpoint(req: SumRequest):
        js = _formula_spec(req.job)
        ctx = make_extension(req.p, req.nu)
        rep = sum_over(js.spec, ctx, tuple(req.y), budget=req.budget,
                       workers=req.workers)
        return SumResponse(p=req.p, nu=req.nu, re=rep.value.real, im=rep.value.imag,
                           abs=abs(rep.value), count=rep.count, poles=rep.poles,
                           ratio_sqrtq=rep.ratio_sqrtq)

    @app.post("/v1/companion", response_model=CompanionResponse)
    def companion(req: CompanionRequest):
        js = _formula_spec(req.job)
        base = make_extension(req.p, req.nu)
        records = []
        for nu in range(1, req.numax + 1):
            rep = companion_sum(js.spec, base, nu, tuple(req.y),
                                budget=req.budget, workers=req.workers)
            records.append(CompanionRecord(
                nu=nu, re=rep.value.real, im=rep.value.imag, abs=abs(rep.value),
                count=rep.count, poles=rep.poles, ratio_sqrtq=rep.ratio_sqrtq))
        return CompanionResponse(p=req.p, base_nu=req.nu, records=records)

    @app.post("/v1/zeta", response_model=ZetaResponse)
    def zeta(req: ZetaRequest):
        js = _resolve(req.job)
        if js.kind == "curve":
            counts = spectrum.plane_curve_counts(js.curve_lhs, js.curve_rhs,
                                                 req.p, range(1, req.numax + 1))
        else:
            if js.spec is None:
                raise ValueError("zeta needs a formula or curve job")
            counts = [defset.count(js.spec.phi, make_extension(req.p, nu),
                                   js.spec.variables, budget=req.budget,
                                   workers=req.workers)
                      for nu in range(1, req.numax + 1)]
        seq = CompanionSequence(req.p, tuple(counts))
        rec = spectrum.min_recurrence(seq)
        spec_w = spectrum.classify_weights(rec, req.p)
        preds_ok = all(spectrum.predict_next(counts[:k], rec) == counts[k]
                       for k in range(rec.order, len(counts)))
        znum = zden = None
        zf = spectrum.zeta_series(seq, rec)
        znum, zden = zf.integer_coeffs()
        return ZetaResponse(
            p=req.p, counts=list(counts), order=rec.order,
            char_poly=[str(c) for c in rec.char_poly],
            weights=list(spec_w.weights),
            roots=[[r.real, r.imag, float(m)] for r, m in spec_w.roots],
            max_weight=spec_w.max_weight,
            zeta_num=list(znum), zeta_den=list(zden),
            predictions_ok=preds_ok)

    @app.post("/v1/density", response_model=DensityResponse)
    def density(req: DensityRequest):
        js = _formula_spec(req.job)
        primes = lab.primes_in_range(req.pmin, req.pmax)
        est = spectrum.density_fit(js.spec.phi, js.spec.variables, primes,
                                   budget=req.budget, workers=req.workers)
        records = []
        for cl in est:
            for (p, n, d, mu_p) in cl.records:
                records.append([p, n, d, mu_p])
        records.sort()
        clusters = [ClusterModel(delta=c.delta, mu=str(c.mu), C=c.C,
                                 support=list(c.support),
                                 unclustered=[r[0] for r in c.unclustered])
                    for c in est]
        passed = all(not c.unclustered for c in est)
        return DensityResponse(records=records, clusters=clusters, passed=passed)

    @app.post("/v1/twists", response_model=TwistsResponse)
    def twists(req: TwistsRequest):
        js = _formula_spec(req.job)
        ctx = make_extension(req.p)
        rep = twist_scan(js.spec, ctx, threshold=req.threshold,
                         budget=req.budget, workers=req.workers)
        nonzero = [h for h in rep.exceptions if any(c != 0 for c in h)]
        return TwistsResponse(p=req.p, count=rep.count,
                              exceptions=[list(h) for h in rep.exceptions],
                              nonzero_exceptions=len(nonzero), bound=rep.bound,
                              observed_D=rep.observed_D,
                              zero_twist_abs=rep.zero_twist_abs,
                              max_ok_abs=rep.max_ok_abs)

    @app.post("/v1/interval", response_model=ExperimentResponse)
    def interval(req: IntervalRequest):
        primes = lab.primes_in_range(req.pmin, req.pmax)
        if req.synthetic:
            rep = lab.synthetic_interval_experiment(primes, budget=req.budget,
                                                    workers=req.workers)
        else:
            js = _formula_spec(req.job)
            rep = lab.interval_experiment(js.spec, primes, budget=req.budget,
                                          workers=req.workers,
                                          max_interval_flags=req.max_flags)
        return _experiment_response(rep)

    @app.post("/v1/equidist", response_model=ExperimentResponse)
    def equidist(req: EquidistRequest):
        js = _formula_spec(req.job)
        rep = lab.equidist_report(js.spec, req.p, req.hmax, budget=req.budget)
        return _experiment_response(rep)

    @app.post("/v1/kloosterman", response_model=ExperimentResponse)
    def kloosterman(req: KloostermanRequest):
        primes = lab.primes_in_range(req.pmin, req.pmax)
        rep = lab.kloosterman_experiment(req.n, primes,
                                         constant_one=req.constant_one,
                                         ratio_bound=req.ratio_bound,
                                         budget=req.budget, workers=req.workers)
        return _experiment_response(rep)

    @app.post("/v1/verify-decomp", response_model=VerifyDecompResponse)
    def verify_decomp(req: VerifyDecompRequest):
        js = _resolve(req.job)
        if js.block is None:
            raise ValueError("verify-decomp needs a block job")
        ctx = make_extension(req.p, req.nu)
        weighted = (not js.spec.f.num.is_zero) or js.spec.chi_key() not in (0,)
        beta = lab._beta_from_spec(js.spec, ctx, tuple(req.y)) if weighted else None
        rep = decomp.verify_reduction(js.block, ctx, tuple(req.y), beta,
                                      budget=req.budget)
        return VerifyDecompResponse(p=req.p, e=rep.e, lhs=str(rep.lhs),
                                    rhs=str(rep.rhs), equal=rep.equal,
                                    weighted=weighted)

    @app.post("/v1/paper-examples", response_model=ExperimentResponse)
    def paper_examples(req: PaperExamplesRequest):
        rep = lab.run_paper_examples(quick=req.quick, budget=req.budget,
                                     workers=req.workers)
        return _experiment_response(rep)

    return app
