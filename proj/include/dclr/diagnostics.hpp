#pragma once

#include <cstdint>
#include <map>
#include <ostream>
#include <string>
#include <vector>

namespace dclr {

/// Line-oriented report of non-fatal events (dropped rows, clamped scores,
/// truncations). Counters aggregate, lines keep the first occurrences.
class Diagnostics {
  public:
    static constexpr size_t kMaxLines = 200;

    void note(const std::string& counter, const std::string& line) {
        ++counters_[counter];
        if (lines_.size() < kMaxLines) lines_.push_back(line);
    }

    void count(const std::string& counter, uint64_t n = 1) { counters_[counter] += n; }

    uint64_t total(const std::string& counter) const {
        auto it = counters_.find(counter);
        return it == counters_.end() ? 0 : it->second;
    }

    bool empty() const { return counters_.empty(); }

    const std::vector<std::string>& lines() const { return lines_; }

    void print(std::ostream& os) const {
        for (const auto& [name, n] : counters_) os << name << ": " << n << "\n";
        for (const auto& l : lines_) os << l << "\n";
    }

  private:
    std::map<std::string, uint64_t> counters_;
    std::vector<std::string> lines_;
};

}  // namespace dclr
