"""Command-line pipeline: fre / stats / density / probes / eval /
mock-scorer subcommands.

All randomness flows from a single --seed (env fallback CSK_PROBE_SEED);
subcomponents derive their streams from stable labels, so any command
re-run with the same configuration and inputs is byte-identical, for any
worker count. Corpora stream with bounded memory: the only whole-in-memory
state is counters, bucket samples (<= buckets x sample size documents) and
probe/prediction sets.
"""

from __future__ import annotations

import signal
from typing import Iterable

import click

from . import corpus_stats as cstats
from . import csk_density as dens
from . import io as cio
from . import metrics as met
from . import probes as prb
from . import readability as rdb
from . import scorer as sco
from .parallel import map_documents
from .segmentation import Document

SEED_ENVVAR = "CSK_PROBE_SEED"


def _fail(message: str) -> "click.UsageError":
    return click.UsageError(message)  # exits with code 2


def _score_doc(doc: Document) -> tuple[Document, rdb.ReadabilityReport]:
    return doc, rdb.compute_fre(doc)


format_option = click.option(
    "--format", "fmt", type=click.Choice(["tsv", "json"]), default="tsv",
    show_default=True, help="Report format.",
)
workers_option = click.option(
    "--workers", type=click.IntRange(min=1), default=1, show_default=True,
    help="Worker processes; never changes output content.",
)
seed_option = click.option(
    "--seed", type=int, default=0, show_default=True, envvar=SEED_ENVVAR,
    help=f"Sampling seed (env fallback {SEED_ENVVAR}).",
)


@click.group()
def main() -> None:
    """Corpus readability, statistics, assertion-density and mask-fill
    evaluation pipeline."""
    # die quietly when a downstream pipe (head, less) closes early
    if hasattr(signal, "SIGPIPE"):
        signal.signal(signal.SIGPIPE, signal.SIG_DFL)


# ---------------------------------------------------------------------------
# fre


@main.group()
def fre() -> None:
    """Flesch Reading-Ease scoring, filtering and bucketing."""


@fre.command("score")
@click.option("--in", "in_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--out", "out_path", default="-", show_default=True)
@click.option("--summary", is_flag=True, help="Emit corpus-level summary instead of per-document rows.")
@format_option
@workers_option
def fre_score(in_path: str, out_path: str, summary: bool, fmt: str, workers: int) -> None:
    """Score every document; documents without words or sentences are
    flagged unreadable rather than scored."""
    try:
        reports = [r for _, r in map_documents(_score_doc, cio.read_documents(in_path), workers)]
    except ValueError as exc:
        raise _fail(str(exc))
    out = cio.open_output(out_path)
    if summary:
        readable = [r for r in reports if r.readable]
        total = (
            sum(r.n_sentences for r in readable),
            sum(r.n_words for r in readable),
            sum(r.n_syllables for r in readable),
        )
        payload = {
            "n_docs": len(reports),
            "n_readable": len(readable),
            "mean_fre_per_doc": (
                sum(r.fre for r in readable) / len(readable) if readable else None
            ),
            "pooled_fre": (
                rdb.fre_from_counts(*total) if readable and total[1] else None
            ),
        }
        if fmt == "json":
            cio.dump_json(out, payload)
        else:
            cio.write_tsv(out, ["key", "value"], sorted(payload.items()))
        return
    if fmt == "json":
        for r in reports:
            cio.dump_json_line(out, {
                "doc_id": r.doc_id, "n_sentences": r.n_sentences,
                "n_words": r.n_words, "n_syllables": r.n_syllables,
                "fre": r.fre, "fre_clamped": r.fre_clamped, "readable": r.readable,
            })
    else:
        cio.write_tsv(
            out,
            ["doc_id", "n_sentences", "n_words", "n_syllables", "fre", "fre_clamped", "readable"],
            ((r.doc_id, r.n_sentences, r.n_words, r.n_syllables, r.fre, r.fre_clamped, r.readable) for r in reports),
        )


@fre.command("filter")
@click.option("--in", "in_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--out", "out_path", required=True)
@click.option("--min-fre", type=float, default=rdb.DEFAULT_MIN_FRE, show_default=True,
              help="Strict threshold: keep documents with FRE > min-fre.")
@workers_option
def fre_filter(in_path: str, out_path: str, min_fre: float, workers: int) -> None:
    """Write the FRE-filtered corpus and report retention."""
    stats = rdb.FilterStats()

    def retained() -> Iterable[Document]:
        for doc, report in map_documents(_score_doc, cio.read_documents(in_path), workers):
            stats.total += 1
            if report.fre is None:
                stats.unreadable += 1
            elif report.fre > min_fre:
                stats.retained += 1
                yield doc

    try:
        with open(out_path, "w", encoding="utf-8") as out:
            cio.write_documents(out, retained())
    except ValueError as exc:
        raise _fail(str(exc))
    ratio = stats.retention
    line = f"retained {stats.retained}/{stats.total}"
    if ratio is not None:
        line += f" ({ratio:.4f})"
    click.echo(line)
    click.echo(f"unreadable dropped: {stats.unreadable}")


@fre.command("bucket")
@click.option("--in", "in_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--out", "out_path", default="-", show_default=True)
@click.option("--width", type=float, default=rdb.DEFAULT_BUCKET_WIDTH, show_default=True)
@click.option("--sample", type=int, default=rdb.DEFAULT_SAMPLE_PER_BUCKET, show_default=True)
@click.option("--ids-out", default=None, help="Optional TSV of sampled doc ids per bucket.")
@format_option
@workers_option
@seed_option
def fre_bucket(in_path: str, out_path: str, width: float, sample: int,
               ids_out: str | None, fmt: str, workers: int, seed: int) -> None:
    """Assign documents to FRE buckets with a seeded per-bucket sample."""
    try:
        acc = rdb.BucketAccumulator(width, sample, seed)
        for doc, report in map_documents(_score_doc, cio.read_documents(in_path), workers):
            acc.add(doc, report)
    except ValueError as exc:
        raise _fail(str(exc))
    buckets = acc.buckets()
    out = cio.open_output(out_path)
    if fmt == "json":
        cio.dump_json(out, [
            {"bucket_lo": b.lower, "bucket_hi": b.upper, "n_docs": b.n_docs, "n_sampled": b.sample_size}
            for b in buckets
        ])
    else:
        cio.write_tsv(out, ["bucket_lo", "bucket_hi", "n_docs", "n_sampled"],
                      ((b.lower, b.upper, b.n_docs, b.sample_size) for b in buckets))
    if ids_out:
        with open(ids_out, "w", encoding="utf-8") as f:
            for bucket, docs in zip(buckets, acc.samples()):
                for doc in docs:
                    f.write(f"{cio.fmt(bucket.lower)}\t{doc.id}\n")


# ---------------------------------------------------------------------------
# stats


@main.command("stats")
@click.option("--in", "in_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--out", "out_path", default="-", show_default=True)
@click.option("--k", type=int, default=cstats.DEFAULT_TOP_K, show_default=True)
@click.option("--freq-threshold", type=float, default=cstats.DEFAULT_FREQ_THRESHOLD,
              show_default=True, help="Strict relative-frequency cutoff for frequent words.")
@click.option("--dump-freq", default=None, help="Optional token<TAB>count dump, sorted by count.")
@format_option
@workers_option
def stats_cmd(in_path: str, out_path: str, k: int, freq_threshold: float,
              dump_freq: str | None, fmt: str, workers: int) -> None:
    """Corpus statistics: lengths, vocabulary, frequent words, top-k mass."""
    acc = cstats.StatsAccumulator()
    try:
        for part in map_documents(cstats.doc_accumulator, cio.read_documents(in_path), workers):
            acc.merge(part)
    except ValueError as exc:
        raise _fail(str(exc))
    stats = acc.finalize(k, freq_threshold)
    payload = {
        "n_docs": stats.n_docs,
        "avg_doc_len_words": stats.avg_doc_len_words,
        "avg_doc_len_sentences": stats.avg_doc_len_sentences,
        "vocab_size": stats.vocab_size,
        "distinct_words": stats.distinct_words,
        "frequent_words": stats.frequent_words,
        "top_k_cumulative": stats.top_k_cumulative,
        "total_word_tokens": stats.total_word_tokens,
        "k": stats.k,
        "freq_threshold": stats.freq_threshold,
    }
    out = cio.open_output(out_path)
    if fmt == "json":
        cio.dump_json(out, payload)
    else:
        cio.write_tsv(out, ["key", "value"], sorted(payload.items()))
    if dump_freq:
        with open(dump_freq, "w", encoding="utf-8") as f:
            for token, count in cstats.top_k_types(acc.counts, len(acc.counts)):
                f.write(f"{token}\t{count}\n")


# ---------------------------------------------------------------------------
# density


@main.command("density")
@click.option("--in", "in_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--assertions", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--out", "out_path", default="-", show_default=True)
@click.option("--min-support", type=int, default=dens.DEFAULT_MIN_SUPPORT, show_default=True)
@click.option("--top", type=int, default=dens.DEFAULT_TOP_PROPERTIES, show_default=True)
@click.option("--loose", is_flag=True, help="Unordered subject/property co-occurrence.")
@click.option("--matches-out", default=None, help="Optional match-event TSV dump.")
@click.option("--by-bucket", is_flag=True, help="Per-FRE-bucket density curve over seeded samples.")
@click.option("--width", type=float, default=rdb.DEFAULT_BUCKET_WIDTH, show_default=True)
@click.option("--sample", type=int, default=rdb.DEFAULT_SAMPLE_PER_BUCKET, show_default=True)
@format_option
@workers_option
@seed_option
def density_cmd(in_path: str, assertions: str, out_path: str, min_support: int,
                top: int, loose: bool, matches_out: str | None, by_bucket: bool,
                width: float, sample: int, fmt: str, workers: int, seed: int) -> None:
    """Spot assertion patterns and report densities."""
    try:
        patterns = dens.load_assertions(assertions, min_support, top)
    except (ValueError, OSError) as exc:
        raise _fail(str(exc))
    spotter = dens.AssertionSpotter(patterns, loose=loose)
    out = cio.open_output(out_path)

    if by_bucket:
        try:
            acc = rdb.BucketAccumulator(width, sample, seed)
            for doc, report in map_documents(_score_doc, cio.read_documents(in_path), workers):
                acc.add(doc, report)
        except ValueError as exc:
            raise _fail(str(exc))
        rows = []
        for idx, sampled in enumerate(acc.samples()):
            n_words = total = 0
            distinct: set[str] = set()
            ordered = sorted(sampled, key=lambda d: d.id)
            for events, _, words in map_documents(spotter.spot_document, ordered, workers):
                n_words += words
                total += len(events)
                distinct.update(e.pattern_id for e in events)
            lo, hi = rdb.bucket_bounds(width)[idx]
            rows.append(dens.BucketDensity(lo, hi, acc.n_docs[idx], len(sampled),
                                           n_words, total, len(distinct)))
        if fmt == "json":
            cio.dump_json(out, [
                {"bucket_lo": b.lower, "bucket_hi": b.upper,
                 "per_word_all": b.per_word_all, "per_word_distinct": b.per_word_distinct}
                for b in rows
            ])
        else:
            cio.write_tsv(out, ["bucket_lo", "bucket_hi", "per_word_all", "per_word_distinct"],
                          ((b.lower, b.upper, b.per_word_all, b.per_word_distinct) for b in rows))
        return

    n_sentences = n_words = 0
    all_events: list[dens.MatchEvent] = []
    try:
        for events, sents, words in map_documents(
            spotter.spot_document, cio.read_documents(in_path), workers
        ):
            n_sentences += sents
            n_words += words
            all_events.extend(events)
    except ValueError as exc:
        raise _fail(str(exc))
    report = dens.density(all_events, n_sentences, n_words)
    payload = {
        "total_matches": report.total_matches,
        "distinct_patterns_matched": report.distinct_patterns_matched,
        "n_sentences": report.n_sentences,
        "n_words": report.n_words,
        "per_sentence": report.per_sentence,
        "per_word": report.per_word,
    }
    if fmt == "json":
        cio.dump_json(out, payload)
    else:
        cio.write_tsv(out, ["key", "value"], sorted(payload.items()))
    if matches_out:
        with open(matches_out, "w", encoding="utf-8") as f:
            for e in all_events:
                f.write(f"{e.pattern_id}\t{e.doc_id}\t{e.sentence_index}\n")


# ---------------------------------------------------------------------------
# probes


@main.group()
def probes() -> None:
    """Masked-probe construction from triples."""


@probes.command("build")
@click.option("--triples", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--mask", type=click.Choice(["object", "predicate", "template"]), required=True)
@click.option("--tag", "dataset_tag", type=click.Choice(list(prb.DATASET_TAGS)), required=True)
@click.option("--out", "out_path", required=True)
@click.option("--skips-out", default=None)
@click.option("--scorer", "scorer_endpoint", default=None,
              help="Scorer endpoint for vocabulary gating (tcp:... or cmd:...).")
@click.option("--mock-corpus", default=None, type=click.Path(exists=True, dir_okay=False),
              help="Corpus for an in-process unigram vocabulary gate.")
@click.option("--mask-marker", default=prb.DEFAULT_MASK_MARKER, show_default=True)
def probes_build(triples: str, mask: str, dataset_tag: str, out_path: str,
                 skips_out: str | None, scorer_endpoint: str | None,
                 mock_corpus: str | None, mask_marker: str) -> None:
    """Build probes; skipped triples are reported with reasons so inputs are
    always fully accounted for."""
    try:
        rows = prb.load_triples(triples)
    except (ValueError, OSError) as exc:
        raise _fail(str(exc))

    client: sco.ScorerClient | None = None
    if scorer_endpoint and mock_corpus:
        raise _fail("--scorer and --mock-corpus are mutually exclusive")
    if scorer_endpoint:
        client = sco.ScorerClient(scorer_endpoint)
        vocab_contains = client.vocab_contains
        mask_marker = client.mask_marker
    elif mock_corpus:
        mock = sco.MockScorer.from_corpus(cio.read_documents(mock_corpus), mask_marker)
        vocab_contains = mock.vocab_contains
    else:
        # no scorer attached: gate only on whitespace-free targets
        def vocab_contains(token: str) -> bool:
            return bool(token) and not any(c.isspace() for c in token)

    try:
        built, skips = prb.build_probes(
            rows, mask, vocab_contains, dataset_tag=dataset_tag, mask_marker=mask_marker
        )
    finally:
        if client is not None:
            client.close()
    prb.write_probes_jsonl(out_path, built)
    if skips_out:
        prb.write_skips_tsv(skips_out, skips)
    click.echo(f"probes: {len(built)}  skips: {len(skips)}  inputs: {len(rows)}")


# ---------------------------------------------------------------------------
# eval


@main.group(name="eval")
def eval_group() -> None:
    """Ranked-prediction evaluation. `rank` and its alias `mrr` report
    MRR / median RR / Hits@k; `pr` reports precision/recall@k; `sig` runs
    the paired bootstrap."""


def _score_probes(
    probe_rows: list[prb.Probe], endpoint: str, top_k: int, batch_size: int
) -> list[sco.RankedPrediction]:
    preds: list[sco.RankedPrediction] = []
    with sco.ScorerClient(endpoint) as client:
        for i in range(0, len(probe_rows), batch_size):
            batch = probe_rows[i : i + batch_size]
            requests = [sco.ScoreRequest(p.probe_id, p.text, top_k) for p in batch]
            preds.extend(client.score_batch(requests))
    return preds


@eval_group.command("rank")
@click.option("--probes", "probes_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--scorer", "scorer_endpoint", default=None, help="tcp:HOST:PORT or cmd:...")
@click.option("--predictions", "predictions_path", default=None,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--dump-predictions", default=None, help="Write the raw prediction dump here.")
@click.option("--group", "group_by", type=click.Choice(["dataset_tag", "typicality_band", "none"]),
              default="dataset_tag", show_default=True)
@click.option("--top-k", type=int, default=10, show_default=True)
@click.option("--ks", default="1,10", show_default=True, help="Comma-separated Hits@k cutoffs.")
@click.option("--batch-size", type=int, default=64, show_default=True)
@click.option("--label", default="scorer", show_default=True, help="Row label for the report.")
@click.option("--out", "out_path", default="-", show_default=True)
@format_option
def eval_rank(probes_path: str, scorer_endpoint: str | None, predictions_path: str | None,
              dump_predictions: str | None, group_by: str, top_k: int, ks: str,
              batch_size: int, label: str, out_path: str, fmt: str) -> None:
    """MRR / median RR / Hits@k per group from a scorer or a dump."""
    if bool(scorer_endpoint) == bool(predictions_path):
        raise _fail("exactly one of --scorer / --predictions is required")
    try:
        probe_rows = prb.read_probes_jsonl(probes_path)
        k_values = [int(x) for x in ks.split(",") if x]
    except ValueError as exc:
        raise _fail(str(exc))
    try:
        if scorer_endpoint:
            predictions = _score_probes(probe_rows, scorer_endpoint, top_k, batch_size)
        else:
            predictions = cio.read_predictions_jsonl(predictions_path)
    except (sco.ScorerError, ValueError) as exc:
        raise click.ClickException(str(exc))
    if dump_predictions:
        with open(dump_predictions, "w", encoding="utf-8") as f:
            cio.write_predictions_jsonl(f, predictions)
    try:
        records = met.build_records(probe_rows, predictions)
        reports = met.aggregate(records, None if group_by == "none" else group_by, k_values)
    except ValueError as exc:
        raise click.ClickException(str(exc))
    out = cio.open_output(out_path)
    if fmt == "json":
        cio.dump_json(out, {
            label: {
                g: {"n": r.n, "mrr": r.mrr, "median_rr": r.median_rr,
                    "hits_at": {str(k): v for k, v in r.hits_at.items()}}
                for g, r in reports.items()
            }
        })
    else:
        header = ["label", "group", "n", "mrr", "median_rr"] + [f"hits@{k}" for k in k_values]
        cio.write_tsv(out, header, (
            [label, g, r.n, r.mrr, r.median_rr] + [r.hits_at[k] for k in k_values]
            for g, r in reports.items()
        ))


eval_group.add_command(eval_rank, name="mrr")  # alias


@eval_group.command("pr")
@click.option("--predictions", "predictions_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--golds", "golds_path", required=True, type=click.Path(exists=True, dir_okay=False),
              help="TSV probe_id<TAB>gold, one gold per line; lines aggregate into gold sets.")
@click.option("--ks", default="5,10", show_default=True)
@click.option("--out", "out_path", default="-", show_default=True)
@format_option
def eval_pr(predictions_path: str, golds_path: str, ks: str, out_path: str, fmt: str) -> None:
    """Macro-averaged precision/recall@k for multi-gold generation eval."""
    try:
        predictions = {p.probe_id: p for p in cio.read_predictions_jsonl(predictions_path)}
        k_values = [int(x) for x in ks.split(",") if x]
        gold_sets: dict[str, set[str]] = {}
        with open(golds_path, encoding="utf-8") as f:
            for lineno, line in enumerate(f, 1):
                line = line.rstrip("\n")
                if not line or line.startswith("#"):
                    continue
                parts = line.split("\t")
                if len(parts) != 2:
                    raise ValueError(f"{golds_path}:{lineno}: expected probe_id<TAB>gold")
                gold_sets.setdefault(parts[0], set()).add(parts[1])
        queries = []
        for probe_id in sorted(gold_sets):
            if probe_id not in predictions:
                raise ValueError(f"no prediction for query {probe_id!r}")
            queries.append((predictions[probe_id], gold_sets[probe_id]))
        results = met.macro_precision_recall(queries, k_values)
    except ValueError as exc:
        raise _fail(str(exc))
    out = cio.open_output(out_path)
    if fmt == "json":
        cio.dump_json(out, {str(k): {"precision": p, "recall": r} for k, (p, r) in results.items()})
    else:
        cio.write_tsv(out, ["k", "precision", "recall"],
                      ((k, p, r) for k, (p, r) in sorted(results.items())))


@eval_group.command("sig")
@click.option("--probes", "probes_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--pred", "pred_specs", multiple=True, required=True,
              help="label=dump.jsonl (repeat; >= 2 for a matrix).")
@click.option("--iterations", type=int, default=10_000, show_default=True)
@click.option("--out", "out_path", default="-", show_default=True)
@format_option
@seed_option
def eval_sig(probes_path: str, pred_specs: tuple[str, ...], iterations: int,
             out_path: str, fmt: str, seed: int) -> None:
    """Pairwise paired-bootstrap p-values between labeled prediction dumps."""
    if len(pred_specs) < 2:
        raise _fail("need at least two --pred label=path entries")
    try:
        probe_rows = prb.read_probes_jsonl(probes_path)
        labeled: dict[str, list[met.EvalRecord]] = {}
        for spec in pred_specs:
            if "=" not in spec:
                raise ValueError(f"--pred needs label=path, got {spec!r}")
            label, path = spec.split("=", 1)
            preds = cio.read_predictions_jsonl(path)
            labeled[label] = met.build_records(probe_rows, preds)
    except ValueError as exc:
        raise _fail(str(exc))
    labels = list(labeled)
    try:
        matrix = {
            a: {
                b: (1.0 if a == b else met.paired_significance(
                    labeled[a], labeled[b], iterations, seed))
                for b in labels
            }
            for a in labels
        }
    except ValueError as exc:
        raise click.ClickException(str(exc))
    out = cio.open_output(out_path)
    if fmt == "json":
        cio.dump_json(out, matrix)
    else:
        cio.write_tsv(out, ["label", *labels],
                      (([a] + [matrix[a][b] for b in labels]) for a in labels))


# ---------------------------------------------------------------------------
# mock scorer service


@main.command("mock-scorer")
@click.option("--corpus", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--stdio", "use_stdio", is_flag=True)
@click.option("--tcp", "tcp_port", type=int, default=None)
@click.option("--mask-marker", default=prb.DEFAULT_MASK_MARKER, show_default=True)
def mock_scorer_cmd(corpus: str, use_stdio: bool, tcp_port: int | None, mask_marker: str) -> None:
    """Serve the deterministic unigram mock scorer over protocol v1."""
    if use_stdio == (tcp_port is not None):
        raise _fail("exactly one of --stdio / --tcp PORT is required")
    try:
        backend = sco.MockScorer.from_corpus(cio.read_documents(corpus), mask_marker)
    except ValueError as exc:
        raise _fail(str(exc))
    if use_stdio:
        sco.serve_stdio(backend)
        return
    server = sco.serve_tcp(backend, port=tcp_port)
    click.echo(f"mock scorer listening on {server.server_address[0]}:{server.server_address[1]}",
               err=True)
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()


if __name__ == "__main__":
    main()
