"""Command-line entry points.

    vibmap fixtures   --out DIR --subjects N --materials LIST --seed S
    vibmap ingest     --manifest PATH --out PATH
    vibmap featurize  --in INDEX --out DIR --features KINDS
    vibmap train      --features DIR --split within|cross --modality ... --out model.vw
    vibmap eval       --model model.vw --features DIR
    vibmap analyze    grain|wetdry|noise|merge --features DIR ...
    vibmap serve      --port N --store DIR
    vibmap simulate-clients --n 2 --track FILE --store DIR [--url URL]
    vibmap render     --store DIR --out map.html
    vibmap run        --config experiment.json
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .errors import VibmapError


def _cmd_fixtures(args) -> int:
    from .harness.fixtures import FixtureSpec, make_fixtures
    from .materials import MATERIAL_NAMES

    materials = tuple(args.materials.split(",")) if args.materials else MATERIAL_NAMES[:6]
    spec = FixtureSpec(
        n_subjects=args.subjects,
        materials=materials,
        seconds_per_session=args.seconds,
        seed=args.seed,
        conditions=tuple(args.conditions.split(",")),
        plate=not args.no_plate,
    )
    manifest = make_fixtures(args.out, spec)
    print(f"wrote {manifest}")
    return 0


def _cmd_ingest(args) -> int:
    from .ingest.index import write_segment_index

    index = write_segment_index(args.manifest, args.out)
    print(
        f"indexed {len(index['sessions'])} sessions / {len(index['segments'])} segments "
        f"-> {args.out}"
    )
    print(f"label balance: max deviation {index['balance']['max_rel_deviation']:.1%}")
    return 0


def _cmd_featurize(args) -> int:
    from .dsp.features import featurize_index
    from .ingest.index import load_segment_index

    index = load_segment_index(args.index)
    kinds = args.features.split(",")
    doc = featurize_index(index, kinds, args.out)
    for kind, entries in doc["kinds"].items():
        print(f"{kind}: {len(entries)} tensors")
    return 0


def _cmd_train(args) -> int:
    from .dsp.features import load_feature_set
    from .harness.pipeline import MODALITY_KIND, MODALITY_SHAPE
    from .ingest.splits import cross_user_folds, within_user_folds
    from .model.checkpoint import save_checkpoint
    from .model.network import NetworkConfig, REFERENCE_CHANNELS
    from .model.training import TrainConfig, train

    kind = MODALITY_KIND[args.modality]
    use_aux = args.tko == "on"
    fs = load_feature_set(args.features, kind, with_aux=use_aux)
    if args.split == "within":
        plan = within_user_folds(fs.ids, k=args.folds, seed=args.seed)
    else:
        pairs = [(int(s), sid) for s, sid in zip(fs.subjects, fs.ids)]
        plan = cross_user_folds({s for s, _ in pairs}, segments=pairs,
                                group_size=args.group_size, seed=args.seed)
    channels = (
        tuple(int(c) for c in args.channels.split(","))
        if args.channels
        else REFERENCE_CHANNELS
    )
    net_cfg = NetworkConfig(
        input_shape=MODALITY_SHAPE[args.modality],
        n_classes=fs.n_classes,
        block_channels=channels,
        use_aux=use_aux,
        seed=args.seed,
    )
    cfg = TrainConfig(epochs=args.epochs, batch_size=args.batch_size, lr=args.lr,
                      seed=args.seed)
    result = train(fs, plan, net_cfg, cfg)
    save_checkpoint(args.out, result.model, fs.label_names, result.summary())
    print(
        f"{args.split}: macro-F1 {result.mean_f1:.3f} (SD {result.std_f1:.3f}), "
        f"accuracy {result.mean_accuracy:.3f} over {len(plan.folds)} folds"
    )
    print(f"model ({result.model.parameter_count()} params) -> {args.out}")
    return 0


def _cmd_eval(args) -> int:
    from .dsp.features import load_feature_set
    from .model.checkpoint import load_checkpoint
    from .model.training import evaluate

    net, label_names, _ = load_checkpoint(args.model)
    kind_by_shape = {(64, 61): "mic_mel", (26, 263): "acc_stft", (64, 102): "fused"}
    kind = kind_by_shape[tuple(net.cfg.input_shape[1:])]
    fs = load_feature_set(args.features, kind, with_aux=net.cfg.use_aux,
                          label_names=label_names)
    m = evaluate(net, fs.X, fs.y, fs.aux, net.cfg.n_classes, label_names)
    print(f"macro-F1 {m.macro_f1:.3f}  accuracy {m.accuracy:.3f}  n={int(m.confusion.sum())}")
    return 0


def _cmd_analyze(args) -> int:
    from .harness.pipeline import _run_analyze, validate_config

    config = validate_config(
        {
            "stages": ["analyze"],
            "workdir": str(Path(args.features).parent),
            "modality": args.modality,
            "analyze": [args.which],
            "seed": args.seed,
            "train": {"epochs": args.epochs,
                      "block_channels": [8, 16, 32, 64, 128]},
            "folds": args.folds,
        }
    )
    workdir = Path(args.features).parent
    result = _run_analyze(config, workdir)
    out_dir = Path(args.out) if args.out else workdir / "analyze"
    print(json.dumps(result.metrics, indent=1))
    print(f"reports under {out_dir}")
    return 0


def _cmd_serve(args) -> int:
    import uvicorn

    from .mapping.server import create_app

    app = create_app(args.store, smoothing_k=args.smoothing_k, radius_m=args.radius)
    uvicorn.run(app, host=args.host, port=args.port)
    return 0


def _load_track(path: Path) -> list[dict]:
    doc = json.loads(path.read_text())
    points = doc["points"] if isinstance(doc, dict) else doc
    if not points:
        raise VibmapError(f"track {path} has no points")
    return points


def _cmd_simulate(args) -> int:
    """Replay a GPS track as n synthetic clients, each walking the track
    with a small lateral offset; labels come from the track or cycle
    through the taxonomy."""
    from .materials import MATERIAL_NAMES
    from .mapping.reports import ReportStore, parse_report

    points = _load_track(Path(args.track))
    post = None
    if args.url:
        import urllib.request

        def post(body: dict) -> None:
            req = urllib.request.Request(
                args.url.rstrip("/") + "/v1/report",
                data=json.dumps(body).encode(),
                headers={"Content-Type": "application/json"},
            )
            urllib.request.urlopen(req).read()

    store = ReportStore(args.store) if args.store else None
    if store is None and post is None:
        print("need --store or --url", file=sys.stderr)
        return 2
    for c in range(args.n):
        offset = 1e-5 * c
        for i, pt in enumerate(points):
            label = pt.get("label") or MATERIAL_NAMES[(i // 10) % len(MATERIAL_NAMES)]
            body = {
                "client_id": f"sim-{c}",
                "seq": i + 1,
                "timestamp_ms": int(pt.get("timestamp_ms", i * 1000)),
                "lat": float(pt["lat"]) + offset,
                "lon": float(pt["lon"]) + offset,
                "label": label,
                "confidence": float(pt.get("confidence", 0.9)),
            }
            if post is not None:
                post(body)
            else:
                store.submit(parse_report(body))
    print(f"replayed {len(points)} points x {args.n} clients")
    return 0


def _cmd_render(args) -> int:
    from .mapping.html import render_html
    from .mapping.reports import ReportStore
    from .mapping.server import build_map_document
    from .mapping.geojson import dumps_geojson

    store = ReportStore(args.store)
    doc = build_map_document(store, smoothing_k=args.smoothing_k, radius_m=args.radius)
    if args.geojson:
        Path(args.geojson).write_text(dumps_geojson(doc))
        print(f"wrote {args.geojson}")
    path = render_html(doc, args.out)
    print(f"wrote {path}")
    return 0


def _cmd_run(args) -> int:
    from .harness.pipeline import run

    config = json.loads(Path(args.config).read_text())
    report = run(config)
    for stage in report.stages:
        line = f"[{stage.status:>6}] {stage.name}"
        if stage.metrics:
            line += "  " + json.dumps(stage.metrics, default=float)
        print(line)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="vibmap", description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fixtures", help="generate a synthetic dataset")
    p.add_argument("--out", required=True)
    p.add_argument("--subjects", type=int, default=3)
    p.add_argument("--materials", default="")
    p.add_argument("--seconds", type=float, default=60.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--conditions", default="Dry")
    p.add_argument("--no-plate", action="store_true")
    p.set_defaults(fn=_cmd_fixtures)

    p = sub.add_parser("ingest", help="validate a manifest and write a segment index")
    p.add_argument("--manifest", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=_cmd_ingest)

    p = sub.add_parser("featurize", help="compute feature tensors from a segment index")
    p.add_argument("--in", dest="index", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--features", default="mic_mel",
                   help="comma list of mic_mel,acc_stft,acc_mel,tko,fused")
    p.set_defaults(fn=_cmd_featurize)

    p = sub.add_parser("train", help="cross-validated training")
    p.add_argument("--features", required=True)
    p.add_argument("--split", choices=["within", "cross"], default="within")
    p.add_argument("--modality", choices=["mic", "acc", "fused"], default="mic")
    p.add_argument("--tko", choices=["on", "off"], default="off")
    p.add_argument("--out", required=True)
    p.add_argument("--folds", type=int, default=10)
    p.add_argument("--group-size", type=int, default=3)
    p.add_argument("--epochs", type=int, default=30)
    p.add_argument("--batch-size", type=int, default=64)
    p.add_argument("--lr", type=float, default=1e-3)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--channels", default="",
                   help="comma list of block channels (default 32,64,128,256,512)")
    p.set_defaults(fn=_cmd_train)

    p = sub.add_parser("eval", help="evaluate a checkpoint on a feature directory")
    p.add_argument("--model", required=True)
    p.add_argument("--features", required=True)
    p.set_defaults(fn=_cmd_eval)

    p = sub.add_parser("analyze", help="secondary studies")
    p.add_argument("which", choices=["grain", "wetdry", "noise", "merge"])
    p.add_argument("--features", required=True,
                   help="features directory inside an experiment workdir")
    p.add_argument("--model", default="")
    p.add_argument("--out", default="")
    p.add_argument("--modality", choices=["mic", "acc", "fused"], default="mic")
    p.add_argument("--epochs", type=int, default=8)
    p.add_argument("--folds", type=int, default=3)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(fn=_cmd_analyze)

    p = sub.add_parser("serve", help="run the report/map HTTP service")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--store", required=True)
    p.add_argument("--smoothing-k", type=int, default=3)
    p.add_argument("--radius", type=float, default=5.0)
    p.set_defaults(fn=_cmd_serve)

    p = sub.add_parser("simulate-clients", help="replay a GPS track as synthetic clients")
    p.add_argument("--n", type=int, default=2)
    p.add_argument("--track", required=True)
    p.add_argument("--store", default="")
    p.add_argument("--url", default="")
    p.set_defaults(fn=_cmd_simulate)

    p = sub.add_parser("render", help="render the stored reports to HTML")
    p.add_argument("--store", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--geojson", default="")
    p.add_argument("--smoothing-k", type=int, default=3)
    p.add_argument("--radius", type=float, default=5.0)
    p.set_defaults(fn=_cmd_render)

    p = sub.add_parser("run", help="run a declarative experiment config")
    p.add_argument("--config", required=True)
    p.set_defaults(fn=_cmd_run)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except VibmapError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
