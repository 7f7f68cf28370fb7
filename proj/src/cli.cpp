#include "dclr/cli.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iomanip>

#include "dclr/augment.hpp"
#include "dclr/checkpoint.hpp"
#include "dclr/corpus.hpp"
#include "dclr/posttrain.hpp"
#include "dclr/synth.hpp"
#include "dclr/train.hpp"

namespace dclr {

namespace {

void print_resolved(const CLI::App& app, std::ostream& out) {
    out << "resolved config for '" << app.get_name() << "' (flags > config file > defaults):\n";
    for (const CLI::Option* opt : app.get_options()) {
        std::string name = opt->get_name();
        if (name == "--help" || name == "--config") continue;
        bool is_flag = opt->get_expected_min() == 0;
        std::string value;
        if (is_flag) {
            value = opt->count() ? "true" : "false";
        } else if (!opt->results().empty()) {
            const auto& rs = opt->results();
            for (size_t i = 0; i < rs.size(); ++i) value += (i ? "," : "") + rs[i];
        } else {
            value = opt->get_default_str();
        }
        out << "  " << name << " = " << value << (opt->count() ? "" : "  [default]") << "\n";
    }
}

struct HyperOpts {
    double tau = 0.05;
    double alpha = 1.0;
    double lambda = 1.0;
    std::string strategy = "tl";
    size_t batch_size = 32;
    double lr = 0.02;
    uint64_t epochs = 3;
    uint64_t eval_interval = 2000;
    uint64_t seed = 1;
    bool ce_views = false;
    bool no_scl = false;
    double clip_norm = -1.0;
    size_t embed_dim = 24;
    size_t hidden_dim = 48;
    size_t max_len = 64;
    double dropout = 0.1;
    size_t max_vocab = 30000;
    uint64_t min_freq = 1;
};

void add_hyper_options(CLI::App* sub, HyperOpts& h) {
    sub->add_option("--tau", h.tau, "contrastive temperature")->capture_default_str();
    sub->add_option("--alpha", h.alpha, "hard-negative penalty")->capture_default_str();
    sub->add_option("--lambda", h.lambda, "cross-entropy weight")->capture_default_str();
    sub->add_option("--strategy", h.strategy, "augmentation strategy")
        ->check(CLI::IsMember({"none", "drop", "sts", "sr", "tl"}))
        ->capture_default_str();
    sub->add_option("--batch-size", h.batch_size, "pairs per batch")->capture_default_str();
    sub->add_option("--lr", h.lr, "peak learning rate (linear decay to 0)")->capture_default_str();
    sub->add_option("--epochs", h.epochs, "training epochs")->capture_default_str();
    sub->add_option("--eval-interval", h.eval_interval, "steps between dev evaluations")
        ->capture_default_str();
    sub->add_option("--seed", h.seed, "master seed")->capture_default_str();
    sub->add_flag("--ce-views", h.ce_views, "include augmented views in the cross-entropy term");
    sub->add_flag("--no-scl", h.no_scl, "disable the contrastive loss (plain fine-tuning)");
    sub->add_option("--clip-norm", h.clip_norm,
                    "gradient clip norm; <0 auto (5.0 when tau<1), 0 off")
        ->capture_default_str();
    sub->add_option("--embed-dim", h.embed_dim, "embedding dimension")->capture_default_str();
    sub->add_option("--hidden-dim", h.hidden_dim, "MLP hidden dimension")->capture_default_str();
    sub->add_option("--max-len", h.max_len, "encoded sequence length")->capture_default_str();
    sub->add_option("--dropout", h.dropout, "encoder dropout rate")->capture_default_str();
    sub->add_option("--max-vocab", h.max_vocab, "vocabulary cap incl. reserved")
        ->capture_default_str();
    sub->add_option("--min-freq", h.min_freq, "minimum token frequency")->capture_default_str();
}

TrainConfig to_config(const HyperOpts& h) {
    TrainConfig cfg;
    cfg.strategy = parse_strategy(h.strategy);
    cfg.loss.tau = h.tau;
    cfg.loss.alpha = h.alpha;
    cfg.loss.lambda = h.lambda;
    cfg.encoder.embed_dim = h.embed_dim;
    cfg.encoder.hidden_dim = h.hidden_dim;
    cfg.encoder.max_len = h.max_len;
    cfg.encoder.dropout = h.dropout;
    cfg.batch_size = h.batch_size;
    cfg.lr = h.lr;
    cfg.epochs = h.epochs;
    cfg.eval_interval = h.eval_interval;
    cfg.seed = h.seed;
    cfg.scl_enabled = !h.no_scl;
    cfg.ce_views = h.ce_views;
    cfg.clip_norm = h.clip_norm;
    return cfg;
}

void print_stats(std::ostream& out, const Dataset& ds) {
    out << "examples: " << ds.examples.size() << "  positives: " << ds.positives()
        << "  negatives: " << ds.negatives() << "  pos:neg = 1:";
    if (ds.positives() == 0) {
        out << "inf";
    } else {
        out << std::fixed << std::setprecision(2)
            << static_cast<double>(ds.negatives()) / static_cast<double>(ds.positives());
        out.unsetf(std::ios::fixed);
    }
    out << "\n";
}

void maybe_write_diagnostics(const Diagnostics& diag, const std::string& path, std::ostream& err) {
    if (diag.empty()) return;
    if (path.empty()) {
        diag.print(err);
        return;
    }
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open diagnostics file: " + path);
    diag.print(f);
}

}  // namespace

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"two-level contrastive trainer for dialogue response selection"};
    app.require_subcommand(1);

    // ---- prepare ----
    auto* prepare = app.add_subcommand("prepare", "parse a corpus, build the vocabulary, report stats");
    struct {
        std::string input, vocab_out, diagnostics, synth_out;
        std::string split = "train";
        size_t max_vocab = 30000;
        uint64_t min_freq = 1;
        bool stats = false;
        size_t synth_dialogues = 0;
        size_t synth_group = 2;
        uint64_t seed = 1;
    } prep;
    prepare->set_config("--config");
    prepare->add_option("--input", prep.input, "corpus TSV (plain or gzip)");
    prepare->add_option("--split", prep.split, "split tag")
        ->check(CLI::IsMember({"train", "dev", "test"}))
        ->capture_default_str();
    prepare->add_option("--vocab-out", prep.vocab_out, "write vocabulary file");
    prepare->add_option("--max-vocab", prep.max_vocab, "vocabulary cap incl. reserved")
        ->capture_default_str();
    prepare->add_option("--min-freq", prep.min_freq, "minimum token frequency")
        ->capture_default_str();
    prepare->add_flag("--stats", prep.stats, "print dataset statistics");
    prepare->add_option("--diagnostics", prep.diagnostics, "write diagnostics report here");
    prepare->add_option("--synth-out", prep.synth_out, "write a synthetic template corpus");
    prepare->add_option("--synth-dialogues", prep.synth_dialogues, "synthetic dialogue count");
    prepare->add_option("--synth-group-size", prep.synth_group, "candidates per synthetic context")
        ->capture_default_str();
    prepare->add_option("--seed", prep.seed, "master seed")->capture_default_str();

    prepare->callback([&] {
        print_resolved(*prepare, out);
        if (!prep.synth_out.empty()) {
            SynthConfig sc;
            sc.dialogues = prep.synth_dialogues ? prep.synth_dialogues : 5000;
            sc.group_size = prep.synth_group;
            Dataset ds = make_synthetic(sc, prep.seed);
            write_tsv(ds, prep.synth_out);
            out << "wrote " << ds.examples.size() << " lines to " << prep.synth_out << "\n";
            if (prep.stats) print_stats(out, ds);
            return;
        }
        if (prep.input.empty())
            throw CLI::ValidationError("prepare", "--input (or --synth-out) is required");
        Split split = prep.split == "dev" ? Split::dev
                      : prep.split == "test" ? Split::test
                                             : Split::train;
        Dataset ds = load_tsv(prep.input, split);
        if (prep.stats) print_stats(out, ds);
        Diagnostics diag;
        if (split == Split::train) {
            auto pairs = pair_hard_negatives(ds, &diag);
            out << "hard-negative pairs: " << pairs.size() << "\n";
        }
        if (!prep.vocab_out.empty()) {
            Vocab v = build_vocab(ds, prep.max_vocab, prep.min_freq);
            v.save(prep.vocab_out);
            out << "vocabulary: " << v.size() << " tokens -> " << prep.vocab_out << "\n";
        }
        maybe_write_diagnostics(diag, prep.diagnostics, err);
    });

    // ---- train ----
    auto* train_cmd = app.add_subcommand("train", "fine-tune the encoder with the combined objective");
    struct {
        std::string train_file, dev_file, out = "model.dclr", vocab_out, history, resume;
        uint64_t max_steps = 0;
    } tr;
    HyperOpts tr_hyper;
    train_cmd->set_config("--config");
    train_cmd->add_option("--train-file", tr.train_file, "training TSV")->required();
    train_cmd->add_option("--dev-file", tr.dev_file, "dev TSV for model selection")->required();
    train_cmd->add_option("--out", tr.out, "best-checkpoint path")->capture_default_str();
    train_cmd->add_option("--vocab-out", tr.vocab_out, "vocabulary path (default <out>.vocab)");
    train_cmd->add_option("--history", tr.history, "metric history JSONL path");
    train_cmd->add_option("--resume", tr.resume, "checkpoint to resume from");
    train_cmd->add_option("--max-steps", tr.max_steps, "stop after this many steps (0 = run out)")
        ->capture_default_str();
    add_hyper_options(train_cmd, tr_hyper);

    train_cmd->callback([&] {
        print_resolved(*train_cmd, out);
        Dataset train_set = load_tsv(tr.train_file, Split::train);
        Dataset dev_set = load_tsv(tr.dev_file, Split::dev);
        Vocab vocab = build_vocab(train_set, tr_hyper.max_vocab, tr_hyper.min_freq);
        TrainConfig cfg = to_config(tr_hyper);

        std::optional<Checkpoint> resume;
        if (!tr.resume.empty()) resume = load_checkpoint(tr.resume);

        TrainResult res = train(cfg, train_set, dev_set, vocab,
                                resume ? &*resume : nullptr, tr.max_steps);

        save_checkpoint(res.best, tr.out);
        std::string vocab_path = tr.vocab_out.empty() ? tr.out + ".vocab" : tr.vocab_out;
        vocab.save(vocab_path);
        out << "best dev R@1 " << res.best.best_metric << " at step " << res.best.step << " -> "
            << tr.out << "\n";
        out << "vocabulary -> " << vocab_path << "\n";
        if (!tr.history.empty()) {
            std::ofstream hf(tr.history, std::ios::binary);
            if (!hf) throw std::runtime_error("cannot open history file: " + tr.history);
            write_history(hf, res.history);
        }
        if (!res.diag.empty()) res.diag.print(err);
    });

    // ---- eval ----
    auto* eval_cmd = app.add_subcommand("eval", "score a test corpus with a trained checkpoint");
    struct {
        std::string checkpoint, vocab, input, records;
        size_t group_size = 0;
    } ev;
    eval_cmd->set_config("--config");
    eval_cmd->add_option("--checkpoint", ev.checkpoint, "trained checkpoint")->required();
    eval_cmd->add_option("--vocab", ev.vocab, "vocabulary file from the training run")->required();
    eval_cmd->add_option("--input", ev.input, "test TSV")->required();
    eval_cmd->add_option("--group-size", ev.group_size,
                         "candidates per context (0 = infer from contiguous contexts)")
        ->capture_default_str();
    eval_cmd->add_option("--records", ev.records, "write metric records JSONL here");

    eval_cmd->callback([&] {
        print_resolved(*eval_cmd, out);
        Checkpoint ckpt = load_checkpoint(ev.checkpoint);
        Vocab vocab = Vocab::load(ev.vocab);
        if (vocab.digest() != ckpt.vocab_digest)
            throw std::runtime_error("vocabulary digest mismatch: " + ev.vocab +
                                     " is not the vocabulary this checkpoint was trained with");
        Dataset test_set = load_tsv(ev.input, Split::test);
        auto groups = score_dataset(ckpt.params, ckpt.config.encoder, vocab, test_set, ev.group_size);
        MetricReport report = aggregate(groups);
        print_report(out, report);
        if (auto r2 = recall2_at1(groups)) {
            out << "R2@1 (first positive vs first negative): " << std::fixed
                << std::setprecision(4) << *r2 << "\n";
            out.unsetf(std::ios::fixed);
        }
        if (!ev.records.empty()) {
            std::ofstream rf(ev.records, std::ios::binary);
            if (!rf) throw std::runtime_error("cannot open records file: " + ev.records);
            std::vector<MetricRecord> recs = {
                {ckpt.step, "test", "R@1", report.r1}, {ckpt.step, "test", "R@2", report.r2},
                {ckpt.step, "test", "R@5", report.r5}, {ckpt.step, "test", "MAP", report.map},
                {ckpt.step, "test", "MRR", report.mrr}, {ckpt.step, "test", "P@1", report.p1},
            };
            if (auto r2 = recall2_at1(groups)) recs.push_back({ckpt.step, "test", "R2@1", *r2});
            write_history(rf, recs);
        }
    });

    // ---- augment-preview ----
    auto* preview = app.add_subcommand("augment-preview", "print anchors next to their augmented views");
    struct {
        std::string input, strategy = "tl";
        uint64_t seed = 1;
        size_t count = 5;
    } pv;
    preview->set_config("--config");
    preview->add_option("--input", pv.input, "corpus TSV")->required();
    preview->add_option("--strategy", pv.strategy, "augmentation strategy")
        ->check(CLI::IsMember({"none", "drop", "sts", "sr", "tl"}))
        ->capture_default_str();
    preview->add_option("--seed", pv.seed, "master seed")->capture_default_str();
    preview->add_option("--count", pv.count, "examples to show")->capture_default_str();

    preview->callback([&] {
        print_resolved(*preview, out);
        Dataset ds = load_tsv(pv.input, Split::train);
        ViewStrategy strategy = parse_strategy(pv.strategy);
        Rng rng(SeedTree(pv.seed).stream("augmentation"));
        size_t shown = 0;
        for (const auto& t : ds.examples) {
            if (shown == pv.count) break;
            if (t.label != 1) continue;
            ++shown;
            out << "# example " << shown << " (" << pv.strategy << ")\n";
            out << "- " << format_tsv_line(t) << "\n";
            switch (strategy) {
                case ViewStrategy::NONE:
                case ViewStrategy::DROP:
                    out << "+ " << format_tsv_line(t)
                        << (strategy == ViewStrategy::DROP ? "   (dropout noise at encode time)" : "")
                        << "\n";
                    break;
                case ViewStrategy::STS: {
                    Rng child(rng.next_u64());
                    out << "+ " << format_tsv_line(sts_view(t, child)) << "\n";
                    break;
                }
                case ViewStrategy::SR: {
                    Rng child(rng.next_u64());
                    out << "+ " << format_tsv_line(sr_view(t, child)) << "\n";
                    break;
                }
                case ViewStrategy::TL: {
                    Rng c1(rng.next_u64());
                    Rng c2(rng.next_u64());
                    out << "+ " << format_tsv_line(sts_view(t, c1)) << "\n";
                    out << "+ " << format_tsv_line(sr_view(t, c2)) << "\n";
                    break;
                }
            }
        }
    });

    // ---- postgen ----
    auto* postgen = app.add_subcommand("postgen", "generate masked/NSP post-training examples");
    struct {
        std::string input, output;
        size_t count = 1000;
        uint64_t seed = 1;
        size_t preview_n = 0;
        size_t max_len = 64;
        size_t max_vocab = 30000;
        uint64_t min_freq = 1;
    } pg;
    postgen->set_config("--config");
    postgen->add_option("--input", pg.input, "dialogue corpus TSV")->required();
    postgen->add_option("--count", pg.count, "examples to generate")->capture_default_str();
    postgen->add_option("--seed", pg.seed, "master seed")->capture_default_str();
    postgen->add_option("--out", pg.output, "binary output file");
    postgen->add_option("--preview", pg.preview_n, "print the first N examples")
        ->capture_default_str();
    postgen->add_option("--max-len", pg.max_len, "encoded sequence length")->capture_default_str();
    postgen->add_option("--max-vocab", pg.max_vocab, "vocabulary cap")->capture_default_str();
    postgen->add_option("--min-freq", pg.min_freq, "minimum token frequency")
        ->capture_default_str();

    postgen->callback([&] {
        print_resolved(*postgen, out);
        Dataset ds = load_tsv(pg.input, Split::train);
        Vocab vocab = build_vocab(ds, pg.max_vocab, pg.min_freq);
        Diagnostics diag;
        auto examples = generate_post_training(ds, vocab, pg.max_len, pg.count, pg.seed, &diag);
        if (!pg.output.empty()) {
            write_post_examples(pg.output, examples);
            out << "wrote " << examples.size() << " examples to " << pg.output << "\n";
        }
        for (size_t i = 0; i < std::min(pg.preview_n, examples.size()); ++i)
            print_post_example(out, examples[i], vocab);
        if (!diag.empty()) diag.print(err);
    });

    // ---- ablate ----
    auto* ablate_cmd = app.add_subcommand("ablate", "train a strategy/loss grid and tabulate metrics");
    struct {
        std::string train_file, dev_file, eval_file, mode = "components";
        size_t group_size = 0;
    } ab;
    HyperOpts ab_hyper;
    ablate_cmd->set_config("--config");
    ablate_cmd->add_option("--train-file", ab.train_file, "training TSV")->required();
    ablate_cmd->add_option("--dev-file", ab.dev_file, "dev TSV")->required();
    ablate_cmd->add_option("--eval-file", ab.eval_file, "evaluation TSV (default: dev)");
    ablate_cmd->add_option("--mode", ab.mode, "grid: components | augmentations")
        ->check(CLI::IsMember({"components", "augmentations"}))
        ->capture_default_str();
    ablate_cmd->add_option("--group-size", ab.group_size, "eval group size (0 = infer)")
        ->capture_default_str();
    add_hyper_options(ablate_cmd, ab_hyper);

    ablate_cmd->callback([&] {
        print_resolved(*ablate_cmd, out);
        Dataset train_set = load_tsv(ab.train_file, Split::train);
        Dataset dev_set = load_tsv(ab.dev_file, Split::dev);
        Dataset eval_set = ab.eval_file.empty() ? dev_set : load_tsv(ab.eval_file, Split::test);
        Vocab vocab = build_vocab(train_set, ab_hyper.max_vocab, ab_hyper.min_freq);
        TrainConfig base = to_config(ab_hyper);
        auto grid = ab.mode == "components" ? component_grid() : augmentation_grid();
        AblationReport report =
            ablate(base, grid, train_set, dev_set, eval_set, vocab, ab.group_size, &err);
        print_ablation(out, report);
    });

    // CLI11 wants the arguments reversed, without the program name.
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n\n" << app.help();
        return 1;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}

}  // namespace dclr
