#pragma once

#include <string>
#include <vector>

#include "dclr/corpus.hpp"
#include "dclr/rng.hpp"

namespace dclr {

enum class ViewStrategy { NONE, DROP, STS, SR, TL };

ViewStrategy parse_strategy(const std::string& name);
std::string strategy_name(ViewStrategy s);

/// Aligned (anchor, positive view, hard negative) batch. Under TL the lists
/// are 2N long: index i and i+N carry the same anchor with an STS view and
/// an SR view respectively.
struct ViewBatch {
    std::vector<Triple> anchors;
    std::vector<Triple> views;
    std::vector<Triple> negatives;
    /// DROP only: the encoder draws an independent dropout mask for the
    /// view pass instead of the views differing textually.
    bool encoder_noise = false;

    size_t size() const { return anchors.size(); }
};

/// Shuffles the tokens of one uniformly chosen context utterance.
/// Response and label are untouched.
Triple sts_view(const Triple& t, Rng& rng);

/// Swaps two distinct context utterances chosen among all but the last,
/// which keeps its position. Contexts with fewer than two movable
/// utterances fall back to sts_view so the view never degenerates to the
/// anchor by construction.
Triple sr_view(const Triple& t, Rng& rng);

/// Builds the (X, X+, X-) batch for one strategy. Each element's
/// augmentation runs on its own child generator derived from rng, so the
/// result is independent of evaluation order.
ViewBatch make_views(const std::vector<Triple>& anchors, const std::vector<Triple>& negatives,
                     ViewStrategy strategy, Rng& rng);

}  // namespace dclr
