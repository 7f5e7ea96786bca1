"""Thin-client CLI: every subcommand issues a request to the sum service.

Without --server the service app is driven in-process through its ASGI
interface, so the CLI works standalone and byte-reproducibly; with
--server http://host:port the same requests go over the wire.

Exit codes: 0 success (and declared bounds hold), 1 a declared bound failed,
2 bad input, 3 budget refused.
"""

from __future__ import annotations

import asyncio
import json
import sys
from pathlib import Path

import click
import httpx

from .defset import DEFAULT_BUDGET

_APP = None


def _local_app():
    global _APP
    if _APP is None:
        from .service.app import create_app
        _APP = create_app()
    return _APP


class ServiceError(RuntimeError):
    def __init__(self, status: int, payload):
        super().__init__(f"service error {status}: {payload}")
        self.status = status
        self.payload = payload if isinstance(payload, dict) else {"detail": payload}


class ServiceClient:
    def __init__(self, server: str | None = None):
        self.server = server

    def post(self, path: str, payload: dict) -> dict:
        if self.server:
            resp = httpx.post(self.server.rstrip("/") + path, json=payload,
                              timeout=None)
            status, data = resp.status_code, resp.json()
        else:
            status, data = asyncio.run(self._local_post(path, payload))
        if status != 200:
            raise ServiceError(status, data)
        return data

    async def _local_post(self, path: str, payload: dict):
        transport = httpx.ASGITransport(app=_local_app())
        async with httpx.AsyncClient(transport=transport,
                                     base_url="http://defsum.internal") as client:
            r = await client.post(path, json=payload, timeout=None)
            return r.status_code, r.json()


def _job_payload(job: str, psi=None, chi=None) -> dict:
    """Builtin name or JSON job file -> JobModel payload."""
    from .jobs import BUILTIN_JOBS
    if job in BUILTIN_JOBS:
        payload: dict = {"name": job}
    else:
        path = Path(job)
        if not path.exists():
            raise click.UsageError(
                f"--job {job!r} is neither a builtin nor an existing file")
        payload = dict(json.loads(path.read_text()))
    if psi is not None:
        payload = _inline_builtin(payload)
        payload["psi"] = int(psi)
    if chi is not None:
        payload = _inline_builtin(payload)
        payload["chi"] = chi if chi == "legendre" else int(chi)
    return payload


def _inline_builtin(payload: dict) -> dict:
    """Expand {"name": builtin} so character flags can override fields."""
    if "name" not in payload:
        return payload
    from .jobs import BUILTIN_JOBS
    from .ringlang import term_text, to_text
    js = BUILTIN_JOBS[payload["name"]]()
    if js.spec is None:
        raise click.UsageError("--psi/--chi apply to formula jobs only")
    return {
        "kind": "formula",
        "formula": to_text(js.spec.phi),
        "vars": list(js.spec.variables),
        "params": list(js.spec.params),
        "f_num": term_text(js.spec.f.num), "f_den": term_text(js.spec.f.den),
        "g_num": term_text(js.spec.g.num), "g_den": term_text(js.spec.g.den),
        "psi": js.spec.psi_a, "chi": js.spec.chi_key(),
    }


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "1" if v else "0"
    if isinstance(v, float):
        return repr(v)
    s = str(v)
    if any(ch in s for ch in ',"\n'):
        s = '"' + s.replace('"', '""') + '"'
    return s


def _csv(columns, rows) -> str:
    lines = [",".join(columns)]
    for row in rows:
        lines.append(",".join(_fmt(v) for v in row))
    return "\n".join(lines) + "\n"


def _emit(csv_text: str, json_obj, out: str | None, comments: list[str] | None = None):
    body = csv_text
    if comments:
        body += "".join(f"# {line}\n" for line in comments)
    click.echo(body, nl=False)
    if out:
        path = Path(out)
        if path.suffix == ".json":
            path.write_text(json.dumps(json_obj, indent=2, sort_keys=True) + "\n")
        else:
            path.write_text(csv_text)


def _run(client_args: dict, path: str, payload: dict) -> dict:
    client = ServiceClient(client_args.get("server"))
    try:
        return client.post(path, payload)
    except ServiceError as exc:
        detail = exc.payload.get("detail", exc.payload)
        kind = exc.payload.get("type", "")
        click.echo(f"error: {detail}", err=True)
        sys.exit(3 if kind == "budget" else 2)
    except httpx.HTTPError as exc:
        click.echo(f"error: cannot reach service: {exc}", err=True)
        sys.exit(2)


def common_options(f):
    for opt in (
        click.option("--server", default=None,
                     help="Base URL of a running service; default runs in-process."),
        click.option("--budget", default=DEFAULT_BUDGET, show_default=True, type=int,
                     help="Enumeration budget in field-operation units."),
        click.option("--workers", default=1, show_default=True, type=int),
        click.option("--out", default=None, type=click.Path(),
                     help="Write records to FILE (.csv) or the full report (.json)."),
    ):
        f = opt(f)
    return f


@click.group()
def main():
    """Sums over first-order definable subsets of finite fields."""


@main.command("jobs")
def jobs_cmd():
    """List builtin jobs."""
    from .jobs import builtin_names
    for name in builtin_names():
        click.echo(name)


@main.command()
@common_options
@click.option("--job", required=True)
@click.option("--p", "p", required=True, type=int)
@click.option("--nu", default=1, show_default=True, type=int)
@click.option("--y", "y", default="", help="Comma-separated parameter values.")
def count(server, budget, workers, out, job, p, nu, y):
    """Count the definable set over F_{p^nu}."""
    yv = [int(t) for t in y.split(",") if t.strip() != ""]
    data = _run({"server": server}, "/v1/count",
                {"job": _job_payload(job), "p": p, "nu": nu, "y": yv,
                 "budget": budget, "workers": workers})
    _emit(_csv(("p", "nu", "count", "cost"),
               [(data["p"], data["nu"], data["count"], data["cost"])]), data, out)


@main.command("sum")
@common_options
@click.option("--job", required=True)
@click.option("--p", "p", required=True, type=int)
@click.option("--nu", default=1, show_default=True, type=int)
@click.option("--y", "y", default="")
@click.option("--psi", default=None, type=int, help="Override the additive twist a.")
@click.option("--chi", default=None, help="Override chi: an index or 'legendre'.")
def sum_cmd(server, budget, workers, out, job, p, nu, y, psi, chi):
    """Exponential sum over the definable set."""
    yv = [int(t) for t in y.split(",") if t.strip() != ""]
    data = _run({"server": server}, "/v1/sum",
                {"job": _job_payload(job, psi, chi), "p": p, "nu": nu, "y": yv,
                 "budget": budget, "workers": workers})
    cols = ("p", "nu", "re", "im", "abs", "count", "ratio_sqrtq")
    _emit(_csv(cols, [tuple(data[c] for c in cols)]), data, out)


@main.command()
@common_options
@click.option("--job", required=True)
@click.option("--p", "p", required=True, type=int)
@click.option("--nu", default=1, show_default=True, type=int,
              help="Base field degree (the characters live on F_{p^nu}).")
@click.option("--numax", default=3, show_default=True, type=int)
@click.option("--y", "y", default="")
def companion(server, budget, workers, out, job, p, nu, numax, y):
    """Companion sums S_nu over extension fields."""
    yv = [int(t) for t in y.split(",") if t.strip() != ""]
    data = _run({"server": server}, "/v1/companion",
                {"job": _job_payload(job), "p": p, "nu": nu, "numax": numax,
                 "y": yv, "budget": budget, "workers": workers})
    rows = [(data["p"], r["nu"], r["re"], r["im"], r["abs"], r["count"],
             r["ratio_sqrtq"]) for r in data["records"]]
    _emit(_csv(("p", "nu", "re", "im", "abs", "count", "ratio_sqrtq"), rows),
          data, out)


@main.command()
@common_options
@click.option("--job", required=True)
@click.option("--p", "p", required=True, type=int)
@click.option("--numax", default=6, show_default=True, type=int)
def zeta(server, budget, workers, out, job, p, numax):
    """Point counts over F_{p^nu}, the exact recurrence, weights and Z(T)."""
    data = _run({"server": server}, "/v1/zeta",
                {"job": _job_payload(job), "p": p, "numax": numax,
                 "budget": budget, "workers": workers})
    rows = [(nu + 1, c) for nu, c in enumerate(data["counts"])]
    comments = [
        f"order={data['order']}",
        "char_poly=" + " ".join(data["char_poly"]),
        "weights=" + " ".join(str(w) for w in data["weights"]),
        f"zeta_num={data['zeta_num']}",
        f"zeta_den={data['zeta_den']}",
        f"predictions_ok={data['predictions_ok']}",
    ]
    _emit(_csv(("nu", "count"), rows), data, out, comments)
    if not data["predictions_ok"]:
        sys.exit(1)


@main.command()
@common_options
@click.option("--job", required=True)
@click.option("--pmin", default=5, show_default=True, type=int)
@click.option("--pmax", default=97, show_default=True, type=int)
def density(server, budget, workers, out, job, pmin, pmax):
    """Fit count ~ mu p^delta across a prime scan."""
    data = _run({"server": server}, "/v1/density",
                {"job": _job_payload(job), "pmin": pmin, "pmax": pmax,
                 "budget": budget, "workers": workers})
    rows = [tuple(r) for r in data["records"]]
    comments = [f"cluster delta={c['delta']} mu={c['mu']} C={c['C']!r} "
                f"support={len(c['support'])} unclustered={c['unclustered']}"
                for c in data["clusters"]]
    _emit(_csv(("p", "count", "delta_p", "mu_p"), rows), data, out, comments)
    if not data["passed"]:
        sys.exit(1)


@main.command()
@common_options
@click.option("--job", required=True)
@click.option("--p", "p", required=True, type=int)
@click.option("--threshold", default=3.0, show_default=True, type=float)
def twists(server, budget, workers, out, job, p, threshold):
    """Scan all additive twists h and report the exceptional ones."""
    data = _run({"server": server}, "/v1/twists",
                {"job": _job_payload(job), "p": p, "threshold": threshold,
                 "budget": budget, "workers": workers})
    cols = ("p", "count", "exceptions", "nonzero_exceptions", "bound",
            "observed_D", "zero_twist_abs", "max_ok_abs")
    row = (data["p"], data["count"], len(data["exceptions"]),
           data["nonzero_exceptions"], data["bound"], data["observed_D"],
           data["zero_twist_abs"], data["max_ok_abs"])
    comments = ["exception h=" + ";".join(str(c) for c in h)
                for h in data["exceptions"]]
    _emit(_csv(cols, [row]), data, out, comments)


@main.command()
@common_options
@click.option("--job", default="squares", show_default=True)
@click.option("--pmin", default=5, show_default=True, type=int)
@click.option("--pmax", default=97, show_default=True, type=int)
@click.option("--synthetic", is_flag=True,
              help="Run length-floor(p/3) synthetic interval formulas instead.")
@click.option("--max-flags", default=None, type=int,
              help="Fail if more than this many primes give intervals.")
def interval(server, budget, workers, out, job, pmin, pmax, synthetic, max_flags):
    """Interval detection and additive-sum magnitudes per prime."""
    data = _run({"server": server}, "/v1/interval",
                {"job": _job_payload(job), "pmin": pmin, "pmax": pmax,
                 "synthetic": synthetic, "max_flags": max_flags,
                 "budget": budget, "workers": workers})
    _emit(_csv(data["columns"], data["records"]), data, out,
          [f"{k}={v}" for k, v in data["summary"].items()])
    if not data["passed"]:
        sys.exit(1)


@main.command()
@common_options
@click.option("--job", default="squares", show_default=True)
@click.option("--p", "p", required=True, type=int)
@click.option("--hmax", default=10, show_default=True, type=int)
def equidist(server, budget, workers, out, job, p, hmax):
    """Weyl sums W_h and the star discrepancy of {x/p}."""
    data = _run({"server": server}, "/v1/equidist",
                {"job": _job_payload(job), "p": p, "hmax": hmax,
                 "budget": budget, "workers": workers})
    _emit(_csv(data["columns"], data["records"]), data, out,
          [f"{k}={v}" for k, v in data["summary"].items()])


@main.command()
@common_options
@click.option("--n", "n", default=2, show_default=True, type=int)
@click.option("--pmin", default=3, show_default=True, type=int)
@click.option("--pmax", default=61, show_default=True, type=int)
@click.option("--constant-one", is_flag=True,
              help="Use the constant-term-1 polynomial variant.")
@click.option("--ratio-bound", default=3.0, show_default=True, type=float)
def kloosterman(server, budget, workers, out, n, pmin, pmax, constant_one,
                ratio_bound):
    """Hyper-Kloosterman sums, irreducible subsums, norm-one counts."""
    data = _run({"server": server}, "/v1/kloosterman",
                {"n": n, "pmin": pmin, "pmax": pmax, "constant_one": constant_one,
                 "ratio_bound": ratio_bound, "budget": budget, "workers": workers})
    _emit(_csv(data["columns"], data["records"]), data, out,
          [f"{k}={v}" for k, v in data["summary"].items()])
    if not data["passed"]:
        for f in data["failures"]:
            click.echo(f"FAIL {f}", err=True)
        sys.exit(1)


@main.command("verify-decomp")
@common_options
@click.option("--job", required=True, help="Block job (builtin or JSON file).")
@click.option("--p", "p", required=True, type=int)
@click.option("--nu", default=1, show_default=True, type=int)
@click.option("--y", "y", default="")
def verify_decomp(server, budget, workers, out, job, p, nu, y):
    """Check the fiber-power collapse identity on an existential block."""
    yv = [int(t) for t in y.split(",") if t.strip() != ""]
    data = _run({"server": server}, "/v1/verify-decomp",
                {"job": _job_payload(job), "p": p, "nu": nu, "y": yv,
                 "budget": budget, "workers": workers})
    cols = ("p", "e", "lhs", "rhs", "equal", "weighted")
    _emit(_csv(cols, [tuple(data[c] for c in cols)]), data, out)
    if not data["equal"]:
        sys.exit(1)


@main.command("paper-examples")
@common_options
@click.option("--quick", is_flag=True, help="Smaller prime ranges.")
def paper_examples(server, budget, workers, out, quick):
    """Run the bundled example suite; nonzero exit on any failing check."""
    data = _run({"server": server}, "/v1/paper-examples",
                {"quick": quick, "budget": budget, "workers": workers})
    _emit(_csv(data["columns"], data["records"]), data, out)
    for name, ok, detail in data["records"]:
        click.echo(f"{'PASS' if ok else 'FAIL'} {name}: {detail}", err=True)
    if not data["passed"]:
        sys.exit(1)


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8787, show_default=True, type=int)
def serve(host, port):
    """Run the HTTP service."""
    import uvicorn
    uvicorn.run(_local_app(), host=host, port=port)


if __name__ == "__main__":
    main()
