"""Command-line front end: train, stability, regress, simeval, report.

Every command is a pure function of the manifest and its input files, so
rerunning in deterministic mode (threads=1) reproduces outputs byte for byte.
Exit codes: 0 success, 1 usage error, 2 data error, 3 numeric failure.
"""

from __future__ import annotations

import argparse
import os
import sys

from . import corpus as corpus_mod
from . import downstream, features, regression, stability
from .embeddings import TRAINERS, load_space, save_space
from .errors import DataError, EmbedstabError, NumericError
from .manifest import RunManifest, load_manifest


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _build_parser() -> _Parser:
    p = _Parser(prog="embedstab", description=__doc__)
    p.add_argument("--manifest", required=True, help="run manifest JSON")
    p.add_argument("--force", action="store_true", help="retrain existing spaces")
    p.add_argument(
        "--threads",
        type=int,
        default=int(os.environ.get("EMBEDSTAB_THREADS", "1")),
        help="worker threads for SGNS (>1 is nondeterministic)",
    )
    p.add_argument("--seed", type=int, default=None, help="override base seed")
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("train", help="train all spaces declared in the manifest")

    ps = sub.add_parser("stability", help="stability records and bucket reports")
    ps.add_argument("--select", default="", help="key=value[,key=value] space filter")
    ps.add_argument("--words", default="all", help="comma-separated words or 'all'")

    sub.add_parser("regress", help="assemble features, fit ridge, write reports")

    pe = sub.add_parser("simeval", help="word-similarity error report")
    pe.add_argument("--pairs", required=True, help="word1 TAB word2 TAB score file")
    pe.add_argument("--select", default="", help="space filter")

    pr = sub.add_parser("report", help="bucket reports from an existing records CSV")
    pr.add_argument("--records", required=True)
    pr.add_argument("--corpus", required=True, help="corpus id for bucketing keys")
    return p


def _load_corpora(m: RunManifest) -> dict[str, corpus_mod.Corpus]:
    return {c.id: corpus_mod.load_corpus(c.path, c.domain, c.id) for c in m.corpora}


def _vocab_cache():
    cache = {}

    def get(corp, min_count):
        key = (corp.id, min_count)
        if key not in cache:
            cache[key] = corpus_mod.build_vocab(corp, min_count)
        return cache[key]

    return get


def cmd_train(m: RunManifest, force: bool = False, threads: int = 1) -> list[str]:
    """Train one space per (corpus, trainer, seed); skip existing unless forced."""
    os.makedirs(m.spaces_dir(), exist_ok=True)
    corpora = _load_corpora(m)
    vocab_of = _vocab_cache()
    written = []
    for entry in m.trainers:
        train = TRAINERS[entry.algorithm]
        for cid, corp in corpora.items():
            for seed in entry.seeds:
                path = m.space_path(cid, entry.algorithm, entry.dimension, seed)
                if os.path.exists(path) and not force:
                    continue
                cfg = entry.config(seed, workers=threads)
                try:
                    space = train(corp, cfg, vocab_of(corp, cfg.min_count))
                except EmbedstabError as exc:
                    raise type(exc)(
                        f"training {entry.algorithm} d={entry.dimension} "
                        f"seed={seed} on corpus {cid!r} failed: {exc}"
                    ) from exc
                save_space(space, path)
                written.append(path)
    return written


def _trained_paths(m: RunManifest) -> list[str]:
    out = []
    for entry in m.trainers:
        for c in m.corpora:
            for seed in entry.seeds:
                out.append(m.space_path(c.id, entry.algorithm, entry.dimension, seed))
    return out


def _parse_select(expr: str) -> dict[str, str]:
    out = {}
    if expr:
        for part in expr.split(","):
            if "=" not in part:
                raise DataError(f"bad selector fragment {part!r}; use key=value")
            k, v = part.split("=", 1)
            if k not in ("algorithm", "corpus", "domain", "dimension", "seed"):
                raise DataError(f"unknown selector key {k!r}")
            out[k] = v
    return out


def _load_selected_spaces(m: RunManifest, select: str = ""):
    filt = _parse_select(select)
    spaces = []
    for path in _trained_paths(m):
        if not os.path.exists(path):
            raise DataError(f"space file missing: {path!r}; run `train` first")
        sp = load_space(path)
        meta = sp.meta
        checks = {
            "algorithm": meta.algorithm,
            "corpus": meta.corpus_id,
            "domain": meta.domain,
            "dimension": str(meta.dimension),
            "seed": str(meta.seed),
        }
        if all(checks[k] == v for k, v in filt.items()):
            spaces.append(sp)
    return spaces


def _common_words(spaces) -> list[str]:
    common = None
    for sp in spaces:
        usable = {
            t
            for t in sp.vocab.tokens
            if sp.vocab.index(t) not in sp.zero_rows
        }
        common = usable if common is None else (common & usable)
    return sorted(common or ())


def cmd_stability(
    m: RunManifest, select: str = "", words: str = "all"
) -> dict[str, str]:
    spaces = _load_selected_spaces(m, select)
    if len(spaces) < 2:
        raise DataError(
            f"selector {select!r} matches {len(spaces)} spaces; need at least 2"
        )
    cfg = m.stability
    k = int(cfg.get("k", 10))
    if words == "all":
        wordlist = _common_words(spaces)
    else:
        wordlist = [w.strip().lower() for w in words.split(",") if w.strip()]
    if not wordlist:
        raise DataError("no words to score")
    records = stability.pairwise_stability_records(spaces, wordlist, k)
    os.makedirs(m.output_dir, exist_ok=True)
    header = [f"manifest {m.hash}"]
    out = {}
    rec_path = os.path.join(m.output_dir, "stability_records.csv")
    stability.write_records_csv(rec_path, records, header)
    out["records"] = rec_path

    corpora = _load_corpora(m)
    by_corpus = {sp.meta.corpus_id for sp in spaces}
    stab_by_word = _mean_by_word(records)
    space_ids = [sp.id for sp in spaces]
    if len(by_corpus) == 1:
        corp = corpora[next(iter(by_corpus))]
        freq_edges = cfg.get("frequency_buckets")
        fr = stability.frequency_bucket_report(
            spaces, corp, freq_edges, k, stab_by_word=stab_by_word
        )
        fr_path = os.path.join(m.output_dir, "frequency_report.csv")
        _write_report(fr, fr_path, header, space_ids, k)
        out["frequency_report"] = fr_path

        pos_edges = cfg.get("position_buckets")
        pr = stability.position_bucket_report(
            spaces, corp, pos_edges, k, stab_by_word=stab_by_word
        )
        pr_path = os.path.join(m.output_dir, "position_report.csv")
        _write_report(pr, pr_path, header, space_ids, k)
        out["position_report"] = pr_path

        k_values = cfg.get("k_values")
        if k_values:
            sweeps = stability.neighbor_sweep_report(
                spaces, corp, k_values, cfg.get("frequency_buckets")
            )
            for label, matrix in sweeps.items():
                safe = label.replace("[", "").replace(")", "").replace(",", "-")
                path = os.path.join(m.output_dir, f"sweep_{safe}.csv")
                _write_report(matrix, path, header, space_ids, k_values)
                out[f"sweep {label}"] = path
    return out


def _write_report(matrix, path, header, space_ids, k) -> None:
    """Report CSV plus the JSON manifest naming spaces, k, buckets, and axis."""
    import json

    matrix.to_csv(path, header)
    manifest = {"spaces": space_ids, "k": k, **matrix.manifest()}
    with open(path + ".manifest.json", "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, sort_keys=True, indent=1)
        fh.write("\n")


def _profiles_and_lexicons(m: RunManifest, corpora):
    vocab_of = _vocab_cache()
    min_count = int(m.trainers[0].overrides.get("min_count", 5))
    profiles = {}
    for cid, corp in corpora.items():
        vocab = vocab_of(corp, min_count)
        positions = corpus_mod.first_positions(corp, vocab)
        profiles[cid] = features.profile_corpus(corp, vocab, positions)
    lex = features.load_lexicons(
        m.lexicons.get("pos"), m.lexicons.get("syllables"), m.lexicons.get("senses")
    )
    return profiles, lex


def cmd_regress(m: RunManifest) -> dict[str, str]:
    spaces = _load_selected_spaces(m)
    if len(spaces) < 2:
        raise DataError("regression needs at least two trained spaces")
    corpora = _load_corpora(m)
    profiles, lexicons = _profiles_and_lexicons(m, corpora)
    cfg = m.regression
    k = int(m.stability.get("k", 10))

    words = _common_words(spaces)
    max_words = cfg.get("max_words")
    if max_words and len(words) > max_words:
        total = {
            w: sum(p.freq.get(w, 0) for p in profiles.values()) for w in words
        }
        words = sorted(words, key=lambda w: (-total[w], w))[: int(max_words)]
        words.sort()
    instances, schema = features.assemble_dataset(
        words,
        spaces,
        profiles,
        lexicons,
        k=k,
        normalized_frequency=bool(cfg.get("normalized_frequency", False)),
    )
    x, y = features.dataset_matrix(instances)
    lam = float(cfg.get("lambda", 1.0))
    fit_kwargs = dict(
        intercept=bool(cfg.get("intercept", True)),
        standardize=bool(cfg.get("standardize", True)),
        normalize_loss=bool(cfg.get("normalize_loss", False)),
    )
    model = regression.fit_ridge(
        x, y, lam=lam, feature_names=schema.names, **fit_kwargs
    )

    os.makedirs(m.output_dir, exist_ok=True)
    header = [f"manifest {m.hash}"]
    out = {}

    model_path = os.path.join(m.output_dir, "model.json")
    regression.save_model(model, model_path)
    out["model"] = model_path

    ds_path = os.path.join(m.output_dir, "dataset.csv")
    features.write_dataset_csv(ds_path, instances, schema, header)
    out["dataset"] = ds_path

    wr_path = os.path.join(m.output_dir, "weight_report.csv")
    _write_csv(
        wr_path,
        ["feature", "weight"],
        [(n, repr(w)) for n, w in regression.weight_report(model, 0.1)],
        header,
    )
    out["weight_report"] = wr_path

    groups = cfg.get("groups") or features.default_groups(schema)
    ab_path = os.path.join(m.output_dir, "ablation.csv")
    results = regression.ablation(x, y, schema.names, groups, lam=lam, **fit_kwargs)
    _write_csv(
        ab_path,
        ["configuration", "n_features", "r_squared"],
        [(r.label, len(r.features), repr(r.r_squared)) for r in results],
        header,
    )
    out["ablation"] = ab_path

    pos_path = os.path.join(m.output_dir, "pos_stability.csv")
    pos_rows = regression.pos_stability_table(instances, schema.names)
    _write_csv(
        pos_path,
        ["primary_pos", "mean_stability", "n"],
        [(t, repr(s), n) for t, s, n in pos_rows],
        header,
    )
    out["pos_stability"] = pos_path

    for key, fname, kwargs in (
        ("domain", "domain_cross.csv", {}),
        ("algorithm", "algorithm_cross.csv", {"in_domain_only": True}),
    ):
        table = regression.cross_table(instances, key=key, **kwargs)
        rows = []
        for i, a in enumerate(table.labels):
            for j, b in enumerate(table.labels):
                mean = table.means[i, j]
                rows.append(
                    (a, b, "" if table.counts[i, j] == 0 else repr(float(mean)),
                     int(table.counts[i, j]))
                )
        path = os.path.join(m.output_dir, fname)
        _write_csv(path, [key + "_a", key + "_b", "mean_stability", "n"], rows, header)
        out[fname] = path
    return out


def cmd_simeval(m: RunManifest, pairs_path: str, select: str = "") -> dict[str, str]:
    spaces = _load_selected_spaces(m, select)
    if len(spaces) < 2:
        raise DataError("simeval needs at least two spaces")
    # evaluation vocabulary: words usable in every selected space
    from embedstab.corpus import Vocabulary

    common = _common_words(spaces)
    vocab = Vocabulary({w: spaces[0].vocab.count(w) for w in common}, min_count=1)
    pairset = downstream.load_pairs(pairs_path, vocab=vocab)
    if not pairset.pairs:
        raise DataError(f"no usable pairs loaded from {pairs_path!r}")
    k = int(m.stability.get("k", 10))
    involved = sorted({p.word1 for p in pairset.pairs} | {p.word2 for p in pairset.pairs})
    records = stability.stability_records(involved, spaces, spaces, k)
    stab = {r.word: r.stability for r in records}
    matrix, dropped = downstream.similarity_error_report(
        pairset.pairs, spaces, stab
    )
    os.makedirs(m.output_dir, exist_ok=True)
    path = os.path.join(m.output_dir, "similarity_error.csv")
    matrix.to_csv(
        path,
        [
            f"manifest {m.hash}",
            f"pairs_loaded {len(pairset.pairs) + pairset.dropped}",
            f"pairs_dropped_oov {pairset.dropped}",
            f"pairs_dropped_unscored {dropped}",
        ],
    )
    return {"similarity_error": path}


def _mean_by_word(records) -> dict[str, float]:
    sums: dict[str, list[float]] = {}
    for r in records:
        sums.setdefault(r.word, []).append(r.stability)
    return {w: sum(v) / len(v) for w, v in sums.items()}


def cmd_report(m: RunManifest, records_path: str, corpus_id: str) -> dict[str, str]:
    records = stability.load_records_csv(records_path)
    if not records:
        raise DataError(f"no records in {records_path!r}")
    by_corpus = {c.id: c for c in m.corpora}
    if corpus_id not in by_corpus:
        raise DataError(f"manifest has no corpus {corpus_id!r}")
    entry = by_corpus[corpus_id]
    corp = corpus_mod.load_corpus(entry.path, entry.domain, entry.id)
    stab = _mean_by_word(records)
    k = records[0].k
    os.makedirs(m.output_dir, exist_ok=True)
    header = [f"manifest {m.hash}", f"records {os.path.basename(records_path)}"]
    out = {}
    space_ids = sorted({r.set_x for r in records} | {r.set_y for r in records})
    fr = stability.frequency_bucket_report(
        [], corp, m.stability.get("frequency_buckets"), k, stab_by_word=stab
    )
    fr_path = os.path.join(m.output_dir, "frequency_report.csv")
    _write_report(fr, fr_path, header, space_ids, k)
    out["frequency_report"] = fr_path
    pr = stability.position_bucket_report(
        [], corp, m.stability.get("position_buckets"), k, stab_by_word=stab
    )
    pr_path = os.path.join(m.output_dir, "position_report.csv")
    _write_report(pr, pr_path, header, space_ids, k)
    out["position_report"] = pr_path
    return out


def _write_csv(path, header_row, rows, comments):
    import csv

    with open(path, "w", encoding="utf-8", newline="") as fh:
        for line in comments or []:
            fh.write(f"# {line}\n")
        w = csv.writer(fh)
        w.writerow(header_row)
        for row in rows:
            w.writerow(row)


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        m = load_manifest(args.manifest, base_seed=args.seed)
        if args.command == "train":
            written = cmd_train(m, force=args.force, threads=args.threads)
            print(f"trained {len(written)} spaces under {m.spaces_dir()}")
        elif args.command == "stability":
            out = cmd_stability(m, select=args.select, words=args.words)
            for name, path in out.items():
                print(f"{name}: {path}")
        elif args.command == "regress":
            out = cmd_regress(m)
            for name, path in out.items():
                print(f"{name}: {path}")
        elif args.command == "simeval":
            out = cmd_simeval(m, args.pairs, select=args.select)
            for name, path in out.items():
                print(f"{name}: {path}")
        elif args.command == "report":
            out = cmd_report(m, args.records, args.corpus)
            for name, path in out.items():
                print(f"{name}: {path}")
    except DataError as exc:
        print(f"embedstab: data error: {exc}", file=sys.stderr)
        return 2
    except NumericError as exc:
        print(f"embedstab: numeric failure: {exc}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
