"""Command-line front end.

The CLI is a thin client of the HTTP service: by default it talks to an
in-process instance of the FastAPI app, and ``--server URL`` points it at a
remote one instead. File access stays local; only codec work crosses the
service boundary (base64 payloads in JSON).

Exit codes: 0 success; 2 usage, parameter, or input-set errors; 3 local I/O
or connection failures; 4 malformed inputs (PPM/FMAP/container); 5 internal
service errors.
"""

from __future__ import annotations

import base64
import csv
import sys
from pathlib import Path

import click
import httpx

from . import __version__
from .metrics import psnr_pooled

EXIT_USAGE = 2
EXIT_IO = 3
EXIT_FORMAT = 4
EXIT_INTERNAL = 5

_CATEGORY_EXIT = {"container": EXIT_FORMAT, "format": EXIT_FORMAT, "value": EXIT_USAGE}


def _fail(code: int, message: str) -> None:
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


class ServiceClient:
    """POSTs to the codec service, local or remote, mapping errors to exits."""

    def __init__(self, server: str | None):
        if server:
            self._client = httpx.Client(base_url=server, timeout=300.0)
        else:
            import warnings

            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                from fastapi.testclient import TestClient

            from .service.app import app

            self._client = TestClient(app)

    def post(self, path: str, payload: dict) -> dict:
        try:
            resp = self._client.post(path, json=payload)
        except httpx.HTTPError as exc:
            _fail(EXIT_IO, f"service request failed: {exc}")
        if resp.status_code == 200:
            return resp.json()
        if resp.status_code == 400:
            info = resp.json()
            detail = info.get("detail", "unknown error")
            category = info.get("category", "value")
            _fail(_CATEGORY_EXIT.get(category, EXIT_INTERNAL), detail)
        if resp.status_code == 422:
            _fail(EXIT_USAGE, f"invalid request: {resp.text}")
        _fail(EXIT_INTERNAL, f"service returned HTTP {resp.status_code}: {resp.text[:200]}")
        raise AssertionError("unreachable")


def _read_file(path: str) -> bytes:
    try:
        return Path(path).read_bytes()
    except OSError as exc:
        _fail(EXIT_IO, f"cannot read {path}: {exc}")
        raise AssertionError("unreachable")


def _write_file(path: str, data: bytes) -> None:
    try:
        Path(path).write_bytes(data)
    except OSError as exc:
        _fail(EXIT_IO, f"cannot write {path}: {exc}")


def _b64(data: bytes) -> str:
    return base64.b64encode(data).decode("ascii")


def _options_payload(target_bpp, tolerance, max_iterations, d, block_size,
                     transform, kept_coeffs, fixed_importance) -> dict:
    return {
        "target_bpp": target_bpp,
        "tolerance": tolerance,
        "max_iterations": max_iterations,
        "d": d,
        "block_size": block_size,
        "transform": transform,
        "kept_coeffs": kept_coeffs,
        "fixed_importance": fixed_importance,
    }


_rate_options = [
    click.option("--target-bpp", type=float, default=0.15, show_default=True,
                 help="Target bits per pixel (full file counted)."),
    click.option("--tolerance", type=float, default=0.005, show_default=True,
                 help="Acceptable bpp overshoot when the target itself cannot be met."),
    click.option("--max-iterations", type=click.IntRange(1, 1000), default=20,
                 show_default=True, help="Encode passes allowed to the rate search."),
    click.option("--d", "d", type=click.IntRange(1, 8), default=4, show_default=True,
                 help="Quantizer bit depth."),
    click.option("--block-size", type=click.IntRange(1, 255), default=4,
                 show_default=True, help="Entropy-coder block size."),
    click.option("--fixed-importance", type=click.IntRange(1, 8), default=None,
                 help="Skip rate control; give every sample this many bitplanes."),
]


def _apply(options):
    def wrap(f):
        for option in reversed(options):
            f = option(f)
        return f
    return wrap


@click.group(help=__doc__)
@click.version_option(__version__, prog_name="fmcodec")
@click.option("--server", metavar="URL", default=None,
              help="Codec service URL; defaults to an in-process service.")
@click.pass_context
def main(ctx: click.Context, server: str | None) -> None:
    ctx.obj = ServiceClient(server)


@main.command()
@click.argument("input_path", metavar="IN.ppm")
@click.argument("output_path", metavar="OUT.nfc")
@_apply(_rate_options)
@click.option("--transform", type=click.IntRange(0, 1), default=1, show_default=True,
              help="0 = identity (one feature per pixel), 1 = 8x8 block cosine.")
@click.option("--kept-coeffs", type=click.IntRange(1, 64), default=6, show_default=True,
              help="Zigzag coefficients kept per block (transform 1).")
@click.option("--report-loss", is_flag=True,
              help="Decode the result and report the rate-distortion loss on stderr.")
@click.option("--loss-mode", type=click.Choice(["literal", "one-minus"]), default="literal",
              show_default=True, help="MS-SSIM term convention for --report-loss.")
@click.option("--lam", type=float, default=0.01, show_default=True,
              help="Rate weight for --report-loss.")
@click.option("--sigma1-sq", type=float, default=1.0, show_default=True)
@click.option("--sigma2-sq", type=float, default=1.0, show_default=True)
@click.pass_obj
def encode(client: ServiceClient, input_path: str, output_path: str,
           target_bpp, tolerance, max_iterations, d, block_size, fixed_importance,
           transform, kept_coeffs, report_loss, loss_mode, lam, sigma1_sq, sigma2_sq) -> None:
    """Compress IN.ppm into OUT.nfc."""
    ppm = _read_file(input_path)
    resp = client.post("/v1/encode", {
        "ppm_base64": _b64(ppm),
        "options": _options_payload(target_bpp, tolerance, max_iterations, d,
                                    block_size, transform, kept_coeffs, fixed_importance),
    })
    blob = base64.b64decode(resp["nfc_base64"])
    _write_file(output_path, blob)
    if resp["unreachable"]:
        click.echo(
            f"warning: target {target_bpp} bpp unreachable; wrote the all-m=1 floor "
            f"at {resp['bpp']:.4f} bpp",
            err=True,
        )
    click.echo(
        f"{input_path}: {resp['bpp']:.4f} bpp in {resp['iterations']} passes "
        f"({len(blob)} bytes)",
        err=True,
    )
    if report_loss:
        dec = client.post("/v1/decode", {"nfc_base64": resp["nfc_base64"]})
        m = client.post("/v1/metrics", {
            "ppm_a_base64": _b64(ppm),
            "ppm_b_base64": dec["ppm_base64"],
        })
        lv = client.post("/v1/loss", {
            "mse": m["mse"], "msssim": m["msssim"],
            "importance_sum": resp["importance_sum"],
            "lam": lam, "sigma1_sq": sigma1_sq, "sigma2_sq": sigma2_sq,
            "msssim_term": loss_mode,
        })
        click.echo(
            f"loss={lv['loss']:.6g} (mode={loss_mode}, mse={m['mse']:.4f}, "
            f"msssim={m['msssim']:.6f}, H(imp)={resp['importance_sum']})",
            err=True,
        )


@main.command()
@click.argument("input_path", metavar="IN.nfc")
@click.argument("output_path", metavar="OUT.ppm")
@click.pass_obj
def decode(client: ServiceClient, input_path: str, output_path: str) -> None:
    """Decompress IN.nfc; writes a PPM, or an FMAP for feature containers."""
    blob = _read_file(input_path)
    resp = client.post("/v1/decode", {"nfc_base64": _b64(blob)})
    if resp["kind"] == "features":
        click.echo("container holds external features; writing FMAP", err=True)
        _write_file(output_path, base64.b64decode(resp["fmap_base64"]))
    else:
        _write_file(output_path, base64.b64decode(resp["ppm_base64"]))


@main.command(name="eval")
@click.argument("orig_dir", metavar="ORIG_DIR")
@click.argument("recon_dir", metavar="RECON_DIR")
@click.argument("report_path", metavar="REPORT.csv")
@click.pass_obj
def eval_cmd(client: ServiceClient, orig_dir: str, recon_dir: str, report_path: str) -> None:
    """Score reconstructions against originals and write a CSV report.

    ORIG_DIR holds name.ppm originals; RECON_DIR holds name.nfc containers
    (bpp is reported) or name.ppm reconstructions (bpp column is "-").
    The final row pools: POOLED, -, pooled PSNR in dB, mean MS-SSIM.
    """
    orig = Path(orig_dir)
    recon = Path(recon_dir)
    for path, label in ((orig, "orig_dir"), (recon, "recon_dir")):
        if not path.is_dir():
            _fail(EXIT_IO, f"{label} {path} is not a directory")
    stems = sorted(p.stem for p in orig.glob("*.ppm"))
    if not stems:
        _fail(EXIT_USAGE, f"no .ppm files in {orig}")
    recon_stems = {p.stem for p in recon.iterdir() if p.suffix in (".ppm", ".nfc")}
    extra = recon_stems - set(stems)
    if extra:
        _fail(EXIT_USAGE, f"mismatched sets: {sorted(extra)} in {recon} have no original")

    rows = []
    pooled = []
    msssims = []
    for stem in stems:
        orig_b64 = _b64(_read_file(str(orig / f"{stem}.ppm")))
        nfc_path = recon / f"{stem}.nfc"
        ppm_path = recon / f"{stem}.ppm"
        if nfc_path.exists():
            blob = _read_file(str(nfc_path))
            dec = client.post("/v1/decode", {"nfc_base64": _b64(blob)})
            if dec["kind"] != "image":
                _fail(EXIT_FORMAT, f"{nfc_path} holds features, not an image")
            recon_b64 = dec["ppm_base64"]
            bpp = f"{len(blob) * 8 / (dec['width'] * dec['height']):.6g}"
        elif ppm_path.exists():
            recon_b64 = _b64(_read_file(str(ppm_path)))
            bpp = "-"
        else:
            _fail(EXIT_USAGE, f"mismatched sets: no {stem}.nfc or {stem}.ppm in {recon}")
            raise AssertionError("unreachable")
        m = client.post("/v1/metrics", {"ppm_a_base64": orig_b64, "ppm_b_base64": recon_b64})
        rows.append((stem, bpp, f"{m['mse']:.10g}", f"{m['msssim']:.10g}"))
        pooled.append((m["sum_sq_err"], m["sample_count"]))
        msssims.append(m["msssim"])

    pooled_psnr = psnr_pooled(pooled)
    mean_msssim = sum(msssims) / len(msssims)
    try:
        with open(report_path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["name", "bpp", "mse", "msssim"])
            writer.writerows(rows)
            writer.writerow(["POOLED", "-", f"{pooled_psnr:.10g}", f"{mean_msssim:.10g}"])
    except OSError as exc:
        _fail(EXIT_IO, f"cannot write {report_path}: {exc}")
    click.echo(f"images={len(rows)} pooled_psnr_db={pooled_psnr:.4f} mean_msssim={mean_msssim:.6f}")


@main.group()
def features() -> None:
    """Code externally produced FMAP feature sets."""


@features.command(name="encode")
@click.argument("input_path", metavar="IN.fmap")
@click.argument("output_path", metavar="OUT.nfc")
@_apply(_rate_options)
@click.pass_obj
def features_encode(client: ServiceClient, input_path: str, output_path: str,
                    target_bpp, tolerance, max_iterations, d, block_size,
                    fixed_importance) -> None:
    """Compress IN.fmap into OUT.nfc (transform id 255)."""
    fmap = _read_file(input_path)
    resp = client.post("/v1/features/encode", {
        "fmap_base64": _b64(fmap),
        "options": _options_payload(target_bpp, tolerance, max_iterations, d,
                                    block_size, 1, 6, fixed_importance),
    })
    blob = base64.b64decode(resp["nfc_base64"])
    _write_file(output_path, blob)
    if resp["unreachable"]:
        click.echo(
            f"warning: target {target_bpp} bpp unreachable; wrote the all-m=1 floor "
            f"at {resp['bpp']:.4f} bpp",
            err=True,
        )
    click.echo(f"{input_path}: {resp['bpp']:.4f} bits per feature sample", err=True)


@features.command(name="decode")
@click.argument("input_path", metavar="IN.nfc")
@click.argument("output_path", metavar="OUT.fmap")
@click.pass_obj
def features_decode(client: ServiceClient, input_path: str, output_path: str) -> None:
    """Decompress a feature container back to an FMAP file."""
    blob = _read_file(input_path)
    resp = client.post("/v1/features/decode", {"nfc_base64": _b64(blob)})
    _write_file(output_path, base64.b64decode(resp["fmap_base64"]))


if __name__ == "__main__":
    main()
