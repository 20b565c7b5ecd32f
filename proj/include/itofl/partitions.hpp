#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <utility>
#include <vector>

namespace itofl {

// r unordered pairs plus k-2r singles covering positions 0..k-1 exactly once.
// Canonical form: each pair ordered small-first, pairs ordered by first
// element, singles ascending; list equality is then a valid dedup test.
struct PairPartition {
    std::vector<std::pair<int, int>> pairs;
    std::vector<int> singles;

    bool operator==(const PairPartition&) const = default;
};

// All partitions of {0..k-1} into r pairs plus singles, in a deterministic
// order: the smallest unused position either stays single or pairs with each
// later position, so each partition appears exactly once, already canonical.
inline std::vector<PairPartition> pair_partitions(int k, int r) {
    if (k < 1) throw std::invalid_argument("pair_partitions: k must be positive");
    if (r < 0 || 2 * r > k) throw std::invalid_argument("pair_partitions: need 0 <= 2r <= k");
    std::vector<PairPartition> out;
    std::vector<int> unused(static_cast<std::size_t>(k));
    std::iota(unused.begin(), unused.end(), 0);
    PairPartition cur;

    auto rec = [&](auto&& self, int pairs_left) -> void {
        if (pairs_left == 0) {
            const std::size_t keep = cur.singles.size();
            cur.singles.insert(cur.singles.end(), unused.begin(), unused.end());
            out.push_back(cur);
            cur.singles.resize(keep);
            return;
        }
        const int a = unused.front();
        std::vector<int> rest(unused.begin() + 1, unused.end());
        // the smallest unused position stays single when enough positions remain
        if (static_cast<int>(rest.size()) >= 2 * pairs_left) {
            cur.singles.push_back(a);
            std::swap(unused, rest);
            self(self, pairs_left);
            std::swap(unused, rest);
            cur.singles.pop_back();
        }
        for (std::size_t i = 0; i < rest.size(); ++i) {
            const int b = rest[static_cast<std::size_t>(i)];
            cur.pairs.emplace_back(a, b);
            std::vector<int> next;
            next.reserve(rest.size() - 1);
            for (std::size_t j = 0; j < rest.size(); ++j)
                if (j != i) next.push_back(rest[j]);
            std::swap(unused, next);
            self(self, pairs_left - 1);
            std::swap(unused, next);
            cur.pairs.pop_back();
        }
    };
    rec(rec, r);
    return out;
}

// all r from 0 to floor(k/2), concatenated in increasing r
inline std::vector<std::vector<PairPartition>> pair_partitions_all(int k) {
    std::vector<std::vector<PairPartition>> out;
    for (int r = 0; 2 * r <= k; ++r) out.push_back(pair_partitions(k, r));
    return out;
}

// k! / (r! 2^r (k-2r)!)
inline std::int64_t pair_partition_count(int k, int r) {
    if (k < 1 || r < 0 || 2 * r > k) throw std::invalid_argument("pair_partition_count: bad arguments");
    auto fact = [](int n) {
        std::int64_t f = 1;
        for (int i = 2; i <= n; ++i) f *= i;
        return f;
    };
    return fact(k) / (fact(r) * (std::int64_t(1) << r) * fact(k - 2 * r));
}

// all k! permutations of positions 0..k-1 in lexicographic order; a
// permutation is applied simultaneously to basis and component indices
inline std::vector<std::vector<int>> coupled_permutations(int k) {
    if (k < 1 || k > 6) throw std::invalid_argument("coupled_permutations: k must be in [1, 6]");
    std::vector<int> perm(static_cast<std::size_t>(k));
    std::iota(perm.begin(), perm.end(), 0);
    std::vector<std::vector<int>> out;
    do {
        out.push_back(perm);
    } while (std::next_permutation(perm.begin(), perm.end()));
    return out;
}

}  // namespace itofl
