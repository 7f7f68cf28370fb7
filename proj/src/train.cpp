#include "dclr/train.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>
#include <stdexcept>

#include "dclr/augment.hpp"
#include "dclr/loss.hpp"

namespace dclr {

namespace {

bool same_context(const Triple& a, const Triple& b) {
    return a.context == b.context;
}

}  // namespace

std::vector<CandidateGroup> score_dataset(const EncoderParams& params, const EncoderConfig& cfg,
                                          const Vocab& vocab, const Dataset& dataset,
                                          size_t group_size) {
    std::vector<CandidateGroup> groups;
    Rng dummy(0);
    uint64_t next_id = 0;
    for (size_t i = 0; i < dataset.examples.size(); ++i) {
        const Triple& t = dataset.examples[i];
        bool new_group;
        if (group_size == 0) {
            new_group = groups.empty() || !same_context(dataset.examples[i - 1], t);
        } else {
            new_group = groups.empty() || groups.back().candidates.size() == group_size;
        }
        if (new_group) {
            groups.push_back(CandidateGroup{next_id++, {}});
        }
        Encoded e = encode_triple(t, vocab, cfg.max_len);
        Activations acts = forward(params, cfg, e.ids, e.true_len, /*dropout=*/false, dummy);
        groups.back().candidates.push_back(Candidate{acts.score, t.label});
    }
    return groups;
}

MetricReport evaluate(const EncoderParams& params, const EncoderConfig& cfg, const Vocab& vocab,
                      const Dataset& dataset, size_t group_size) {
    return aggregate(score_dataset(params, cfg, vocab, dataset, group_size));
}

double embedding_margin(const EncoderParams& params, const EncoderConfig& cfg, const Vocab& vocab,
                        const Dataset& dataset, uint64_t view_seed) {
    auto pairs = pair_hard_negatives(dataset);
    Rng dummy(0);
    SeedTree st(view_seed);
    double sum = 0.0;
    for (size_t i = 0; i < pairs.size(); ++i) {
        const auto& pair = pairs[i];
        Rng sts_rng(st.stream("margin-sts", 0, 0, i));
        Rng sr_rng(st.stream("margin-sr", 0, 0, i));
        Triple sts = sts_view(pair.positive, sts_rng);
        Triple sr = sr_view(pair.positive, sr_rng);

        auto rep = [&](const Triple& t) {
            Encoded e = encode_triple(t, vocab, cfg.max_len);
            return forward(params, cfg, e.ids, e.true_len, false, dummy).h;
        };
        auto h = rep(pair.positive);
        double pos_part = 0.5 * (cosine_sim(h, rep(sts)) + cosine_sim(h, rep(sr)));
        double neg_part = cosine_sim(h, rep(pair.hard_negative));
        sum += pos_part - neg_part;
    }
    return sum / static_cast<double>(pairs.size());
}

namespace {

struct EncodedBatch {
    std::vector<Activations> anchors;
    std::vector<Activations> views;
    std::vector<Activations> negatives;
};

Checkpoint snapshot(const TrainConfig& cfg, uint64_t vocab_digest, const EncoderParams& params,
                    const AdamMoments& moments, uint64_t step, double best_metric) {
    Checkpoint c;
    c.config = cfg;
    c.vocab_digest = vocab_digest;
    c.params = params;
    c.moments = moments;
    c.step = step;
    c.best_metric = best_metric;
    return c;
}

}  // namespace

TrainResult train(const TrainConfig& cfg_in, const Dataset& train_set, const Dataset& dev_set,
                  const Vocab& vocab, const Checkpoint* resume, uint64_t stop_after_steps) {
    TrainConfig cfg = cfg_in;
    cfg.encoder.vocab_size = vocab.size();
    cfg.validate();
    cfg.encoder.validate();

    TrainResult result;
    const uint64_t vocab_digest = vocab.digest();

    auto pairs = pair_hard_negatives(train_set, &result.diag);
    const size_t n = cfg.batch_size;
    size_t full = pairs.size() / n;
    size_t rem = pairs.size() % n;
    const uint64_t batches_per_epoch = full + (rem >= 2 ? 1 : 0);
    if (batches_per_epoch == 0) throw std::runtime_error("train: not enough pairs for one batch");
    if (cfg.total_steps == 0) cfg.total_steps = cfg.epochs * batches_per_epoch;

    SeedTree seeds(cfg.seed);
    EncoderParams params;
    AdamMoments moments = AdamMoments::zeros(cfg.encoder);
    uint64_t step = 0;
    double best_metric = -1.0;

    if (resume) {
        if (resume->vocab_digest != vocab_digest)
            throw std::runtime_error("train: checkpoint was built with a different vocabulary");
        if (resume->config.encoder.vocab_size != cfg.encoder.vocab_size)
            throw std::runtime_error("train: checkpoint vocab_size mismatch");
        cfg = resume->config;
        params = resume->params;
        moments = resume->moments;
        step = resume->step;
        best_metric = resume->best_metric;
    } else {
        params = init_params(cfg.encoder, seeds.stream("init"));
    }

    const double clip = cfg.resolved_clip_norm();
    Checkpoint best = snapshot(cfg, vocab_digest, params, moments, step, best_metric);

    auto run_eval = [&](uint64_t at_step) {
        MetricReport report = evaluate(params, cfg.encoder, vocab, dev_set, 0);
        result.history.push_back({at_step, "dev", "R@1", report.r1});
        result.history.push_back({at_step, "dev", "R@2", report.r2});
        result.history.push_back({at_step, "dev", "MAP", report.map});
        result.history.push_back({at_step, "dev", "MRR", report.mrr});
        if (report.r1 > best_metric) {
            best_metric = report.r1;
            best = snapshot(cfg, vocab_digest, params, moments, at_step, best_metric);
        }
    };

    bool stopped = false;
    uint64_t last_eval_step = 0;
    for (uint64_t epoch = 0; epoch < cfg.epochs && !stopped; ++epoch) {
        if ((epoch + 1) * batches_per_epoch <= step) continue;  // epoch fully covered by resume
        auto batches = make_batches(pairs, n, seeds.stream("data-shuffle", epoch), &result.diag);
        for (uint64_t b = 0; b < batches.size(); ++b) {
            uint64_t this_step = epoch * batches_per_epoch + b + 1;
            if (this_step <= step) continue;  // resumed past this point

            std::vector<Triple> x, x_neg;
            x.reserve(batches[b].size());
            x_neg.reserve(batches[b].size());
            for (const auto& p : batches[b]) {
                x.push_back(p.positive);
                x_neg.push_back(p.hard_negative);
            }

            Rng aug_rng(seeds.stream("augmentation", epoch, b));
            ViewBatch vb = make_views(x, x_neg, cfg.strategy, aug_rng);
            const size_t m = vb.size();

            // One dropout stream per batch, consumed in fixed pass order.
            Rng drop_rng(seeds.stream("dropout", epoch, b));
            const bool train_noise = cfg.encoder.dropout > 0.0;

            EncodedBatch enc;
            auto encode_all = [&](const std::vector<Triple>& triples,
                                  std::vector<Activations>& out) {
                out.reserve(triples.size());
                for (const auto& t : triples) {
                    Encoded e = encode_triple(t, vocab, cfg.encoder.max_len, &result.diag);
                    out.push_back(forward(params, cfg.encoder, e.ids, e.true_len, train_noise,
                                          drop_rng));
                }
            };
            encode_all(vb.anchors, enc.anchors);
            encode_all(vb.views, enc.views);
            encode_all(vb.negatives, enc.negatives);

            RepBatch reps;
            reps.anchors.reserve(m);
            reps.views.reserve(m);
            reps.negatives.reserve(m);
            for (size_t i = 0; i < m; ++i) {
                reps.anchors.push_back(enc.anchors[i].h);
                reps.views.push_back(enc.views[i].h);
                reps.negatives.push_back(enc.negatives[i].h);
            }

            // Cross-entropy sees each dataset-labeled pair once; under TL the
            // first block of the duplicated batch is the original X.
            const size_t n_orig = x.size();
            std::vector<double> ce_scores;
            std::vector<int> ce_labels;
            for (size_t i = 0; i < n_orig; ++i) {
                ce_scores.push_back(enc.anchors[i].score);
                ce_labels.push_back(1);
            }
            for (size_t i = 0; i < n_orig; ++i) {
                ce_scores.push_back(enc.negatives[i].score);
                ce_labels.push_back(0);
            }
            if (cfg.ce_views && cfg.strategy != ViewStrategy::NONE) {
                for (size_t i = 0; i < m; ++i) {
                    ce_scores.push_back(enc.views[i].score);
                    ce_labels.push_back(1);
                }
            }

            TotalResult total = total_loss(reps, ce_scores, ce_labels, cfg.loss, cfg.scl_enabled);
            if (!std::isfinite(total.loss))
                throw std::runtime_error("train: non-finite loss at epoch " + std::to_string(epoch) +
                                         " batch " + std::to_string(b));
            result.diag.count("bce_clamped", total.ce_part.clamped);

            EncoderParams grads = EncoderParams::zeros(cfg.encoder);
            const std::vector<double> zero_h(cfg.encoder.embed_dim, 0.0);
            auto scl_grad = [&](const std::vector<std::vector<double>>& g,
                                size_t i) -> const std::vector<double>& {
                return cfg.scl_enabled ? g[i] : zero_h;
            };
            for (size_t i = 0; i < m; ++i) {
                double gs = i < n_orig ? total.ce_part.grad_scores[i] : 0.0;
                backward(params, cfg.encoder, enc.anchors[i],
                         scl_grad(total.scl_part.grad_anchors, i), gs, grads);
            }
            for (size_t i = 0; i < m; ++i) {
                double gs = 0.0;
                if (cfg.ce_views && cfg.strategy != ViewStrategy::NONE)
                    gs = total.ce_part.grad_scores[2 * n_orig + i];
                backward(params, cfg.encoder, enc.views[i], scl_grad(total.scl_part.grad_views, i),
                         gs, grads);
            }
            for (size_t i = 0; i < m; ++i) {
                double gs = i < n_orig ? total.ce_part.grad_scores[n_orig + i] : 0.0;
                backward(params, cfg.encoder, enc.negatives[i],
                         scl_grad(total.scl_part.grad_negatives, i), gs, grads);
            }

            clip_global_norm(grads, clip);
            step = this_step;
            optimizer_step(params, grads, moments, step, decayed_lr(cfg.lr, step, cfg.total_steps));
            result.history.push_back({step, "train", "loss", total.loss});

            if (step % cfg.eval_interval == 0) {
                run_eval(step);
                last_eval_step = step;
            }
            if (stop_after_steps > 0 && step >= stop_after_steps) {
                stopped = true;
                break;
            }
        }
    }

    if (!stopped && step > 0 && last_eval_step != step) run_eval(step);

    result.final_state = snapshot(cfg, vocab_digest, params, moments, step, best_metric);
    if (best_metric < 0.0) best = result.final_state;  // never evaluated (early stop)
    result.best = best;
    return result;
}

std::vector<AblationCell> component_grid() {
    return {
        {"base", ViewStrategy::NONE, false, false},
        {"tl w/o cl", ViewStrategy::TL, false, true},
        {"tl", ViewStrategy::TL, true, false},
    };
}

std::vector<AblationCell> augmentation_grid() {
    return {
        {"base", ViewStrategy::NONE, false, false},
        {"drop", ViewStrategy::DROP, true, false},
        {"sr", ViewStrategy::SR, true, false},
        {"sts", ViewStrategy::STS, true, false},
        {"tl", ViewStrategy::TL, true, false},
    };
}

AblationReport ablate(const TrainConfig& base, const std::vector<AblationCell>& grid,
                      const Dataset& train_set, const Dataset& dev_set, const Dataset& eval_set,
                      const Vocab& vocab, size_t group_size, std::ostream* log) {
    AblationReport report;
    for (const auto& cell : grid) {
        TrainConfig cfg = base;
        cfg.strategy = cell.strategy;
        cfg.scl_enabled = cell.scl;
        cfg.ce_views = cell.ce_views;
        if (log) *log << "ablate: training cell '" << cell.label << "'\n";
        TrainResult run = train(cfg, train_set, dev_set, vocab);
        MetricReport metrics =
            evaluate(run.best.params, run.best.config.encoder, vocab, eval_set, group_size);
        report.rows.emplace_back(cell.label, metrics);
    }
    return report;
}

void print_ablation(std::ostream& os, const AblationReport& report) {
    size_t width = 5;
    for (const auto& [label, metrics] : report.rows) width = std::max(width, label.size());
    os << std::left << std::setw(static_cast<int>(width) + 2) << "model"
       << "R@1     R@2     R@5     MAP     MRR     P@1\n";
    os << std::fixed << std::setprecision(4);
    for (const auto& [label, m] : report.rows) {
        os << std::left << std::setw(static_cast<int>(width) + 2) << label << m.r1 << "  " << m.r2
           << "  " << m.r5 << "  " << m.map << "  " << m.mrr << "  " << m.p1 << "\n";
    }
    os.unsetf(std::ios::fixed);
}

void write_history(std::ostream& os, const std::vector<MetricRecord>& history) {
    std::ostringstream num;
    num << std::setprecision(17);
    for (const auto& rec : history) {
        num.str("");
        num << rec.value;
        os << "{\"step\":" << rec.step << ",\"split\":\"" << rec.split << "\",\"metric\":\""
           << rec.metric << "\",\"value\":" << num.str() << "}\n";
    }
}

}  // namespace dclr
