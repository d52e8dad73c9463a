#include "threatbench/core/split.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "threatbench/core/error.hpp"

namespace threatbench {

SplitIndices stratified_split_indices(std::span<const int> labels, double test_fraction,
                                      const RngStream& rng) {
    if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
        throw ConfigError("stratified_split: test_fraction must lie strictly between 0 and 1");
    }
    std::map<int, std::vector<std::size_t>> by_class;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        by_class[labels[i]].push_back(i);
    }
    SplitIndices out;
    for (auto& [cls, members] : by_class) {
        if (members.size() < 2) {
            throw DataError("stratified_split: class " + std::to_string(cls) + " has " +
                            std::to_string(members.size()) + " member(s); need at least 2");
        }
        const auto test_count = static_cast<std::size_t>(
            std::floor(static_cast<double>(members.size()) * test_fraction + 0.5));
        auto stream = rng.child("class=" + std::to_string(cls));
        stream.shuffle(members);
        out.test.insert(out.test.end(), members.begin(),
                        members.begin() + static_cast<std::ptrdiff_t>(test_count));
        out.train.insert(out.train.end(),
                         members.begin() + static_cast<std::ptrdiff_t>(test_count), members.end());
    }
    std::sort(out.train.begin(), out.train.end());
    std::sort(out.test.begin(), out.test.end());
    return out;
}

std::pair<Dataset, Dataset> stratified_split(const Dataset& dataset, std::string_view label_column,
                                             double test_fraction, const RngStream& rng) {
    const auto labels = dataset.labels(label_column);
    const auto idx = stratified_split_indices(labels, test_fraction, rng);
    return {dataset.select_rows(idx.train), dataset.select_rows(idx.test)};
}

} // namespace threatbench
