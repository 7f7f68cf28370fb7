#include "dclr/augment.hpp"

#include <stdexcept>

namespace dclr {

ViewStrategy parse_strategy(const std::string& name) {
    if (name == "none") return ViewStrategy::NONE;
    if (name == "drop") return ViewStrategy::DROP;
    if (name == "sts") return ViewStrategy::STS;
    if (name == "sr") return ViewStrategy::SR;
    if (name == "tl") return ViewStrategy::TL;
    throw std::invalid_argument("unknown strategy '" + name + "' (none|drop|sts|sr|tl)");
}

std::string strategy_name(ViewStrategy s) {
    switch (s) {
        case ViewStrategy::NONE: return "none";
        case ViewStrategy::DROP: return "drop";
        case ViewStrategy::STS: return "sts";
        case ViewStrategy::SR: return "sr";
        case ViewStrategy::TL: return "tl";
    }
    return "none";
}

Triple sts_view(const Triple& t, Rng& rng) {
    if (t.context.empty()) throw std::invalid_argument("sts_view: empty context");
    Triple view = t;
    size_t u = static_cast<size_t>(rng.uniform_int(view.context.size()));
    rng.shuffle(view.context[u]);
    return view;
}

Triple sr_view(const Triple& t, Rng& rng) {
    if (t.context.empty()) throw std::invalid_argument("sr_view: empty context");
    size_t movable = t.context.size() - 1;  // last utterance keeps its place
    if (movable < 2) return sts_view(t, rng);

    Triple view = t;
    size_t i = static_cast<size_t>(rng.uniform_int(movable));
    size_t j = static_cast<size_t>(rng.uniform_int(movable - 1));
    if (j >= i) ++j;
    std::swap(view.context[i], view.context[j]);
    return view;
}

ViewBatch make_views(const std::vector<Triple>& anchors, const std::vector<Triple>& negatives,
                     ViewStrategy strategy, Rng& rng) {
    if (anchors.empty()) throw std::invalid_argument("make_views: empty batch");
    if (anchors.size() != negatives.size())
        throw std::invalid_argument("make_views: anchors and negatives must align");

    auto child = [&rng]() { return Rng(rng.next_u64()); };

    ViewBatch out;
    switch (strategy) {
        case ViewStrategy::NONE:
            out.anchors = anchors;
            out.views = anchors;
            out.negatives = negatives;
            break;
        case ViewStrategy::DROP:
            out.anchors = anchors;
            out.views = anchors;
            out.negatives = negatives;
            out.encoder_noise = true;
            break;
        case ViewStrategy::STS:
        case ViewStrategy::SR:
            out.anchors = anchors;
            out.negatives = negatives;
            out.views.reserve(anchors.size());
            for (const auto& a : anchors) {
                Rng r = child();
                out.views.push_back(strategy == ViewStrategy::STS ? sts_view(a, r)
                                                                  : sr_view(a, r));
            }
            break;
        case ViewStrategy::TL: {
            // Duplicate the batch: first block STS views, second block SR views.
            size_t n = anchors.size();
            out.anchors.reserve(2 * n);
            out.views.reserve(2 * n);
            out.negatives.reserve(2 * n);
            out.anchors.insert(out.anchors.end(), anchors.begin(), anchors.end());
            out.anchors.insert(out.anchors.end(), anchors.begin(), anchors.end());
            for (const auto& a : anchors) {
                Rng r = child();
                out.views.push_back(sts_view(a, r));
            }
            for (const auto& a : anchors) {
                Rng r = child();
                out.views.push_back(sr_view(a, r));
            }
            out.negatives.insert(out.negatives.end(), negatives.begin(), negatives.end());
            out.negatives.insert(out.negatives.end(), negatives.begin(), negatives.end());
            break;
        }
    }
    return out;
}

}  // namespace dclr
