#pragma once

#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "itofl/coefficients.hpp"

namespace itofl {

// Versioned text database of exact coefficients, one record per line:
//   k,j1,...,jk,num,den        (j1 is the innermost index)
// The header pins basis, reference interval, index ordering and weights so a
// reader cannot silently misinterpret the records. v1 stores unit weights only.
inline constexpr const char* kCoeffDbMagic = "itofl-coeffdb v1";

struct CoeffDbError : std::runtime_error {
    explicit CoeffDbError(const std::string& what) : std::runtime_error(what) {}
};

inline void export_db(int p, const std::vector<int>& multiplicities, const std::string& path) {
    detail::check_index(p);
    std::int64_t total = 0;
    for (int k : multiplicities) {
        detail::check_multiplicity(k);
        std::int64_t n = 1;
        for (int l = 0; l < k; ++l) n *= p + 1;
        total += n;
    }
    std::ofstream out(path);
    if (!out) throw CoeffDbError("cannot open for writing: " + path);
    out << kCoeffDbMagic << "\n";
    out << "basis: legendre\n";
    out << "interval: [-1,1]\n";
    out << "ordering: j1-innermost\n";
    out << "weights: unit\n";
    out << "records: " << total << "\n";
    std::vector<int> idx;
    for (int k : multiplicities) {
        CoefficientGrid grid = coefficient_grid(WeightSpec::unit(k), p);
        for (std::int64_t f = 0; f < grid.size(); ++f) {
            grid.unflatten(f, idx);
            const Rational& v = grid.cbar_flat(f);
            out << k;
            for (int j : idx) out << ',' << j;
            out << ',' << num(v) << ',' << den(v) << "\n";
        }
    }
    if (!out) throw CoeffDbError("write failure: " + path);
}

struct CoeffDb {
    // per multiplicity: exact values keyed by innermost-first index tuples
    std::map<int, std::map<std::vector<int>, Rational>> blocks;

    std::int64_t record_count() const {
        std::int64_t n = 0;
        for (const auto& [k, m] : blocks) n += static_cast<std::int64_t>(m.size());
        return n;
    }
};

inline CoeffDb import_db(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw CoeffDbError("cannot open: " + path);
    std::string line;
    auto need_line = [&](const char* what) {
        if (!std::getline(in, line)) throw CoeffDbError(std::string("malformed: missing ") + what);
        return line;
    };
    if (need_line("magic") != kCoeffDbMagic) throw CoeffDbError("version mismatch or not a coefficient db");
    if (need_line("basis") != "basis: legendre") throw CoeffDbError("malformed: unsupported basis");
    if (need_line("interval") != "interval: [-1,1]") throw CoeffDbError("malformed: unsupported interval");
    if (need_line("ordering") != "ordering: j1-innermost") throw CoeffDbError("malformed: unsupported ordering");
    if (need_line("weights") != "weights: unit") throw CoeffDbError("malformed: unsupported weights");
    std::istringstream hdr(need_line("record count"));
    std::string tag;
    std::int64_t declared = -1;
    hdr >> tag >> declared;
    if (tag != "records:" || declared < 0) throw CoeffDbError("malformed: bad record count line");

    CoeffDb db;
    std::int64_t seen = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> fields;
        std::string cur;
        std::istringstream ls(line);
        while (std::getline(ls, cur, ',')) fields.push_back(cur);
        if (fields.size() < 4) throw CoeffDbError("malformed record: " + line);
        int k = 0;
        try {
            k = std::stoi(fields[0]);
        } catch (...) {
            throw CoeffDbError("malformed record: " + line);
        }
        if (k < 1 || k > kMaxMultiplicity || fields.size() != static_cast<std::size_t>(k) + 3)
            throw CoeffDbError("malformed record: " + line);
        std::vector<int> idx(static_cast<std::size_t>(k));
        try {
            for (int l = 0; l < k; ++l) idx[static_cast<std::size_t>(l)] = std::stoi(fields[static_cast<std::size_t>(l) + 1]);
            Rational v(BigInt(fields[fields.size() - 2]), BigInt(fields[fields.size() - 1]));
            for (int j : idx)
                if (j < 0 || j > kMaxLegendreIndex) throw CoeffDbError("malformed record: index range");
            auto [it, fresh] = db.blocks[k].emplace(std::move(idx), std::move(v));
            if (!fresh) throw CoeffDbError("malformed: duplicate record");
        } catch (const CoeffDbError&) {
            throw;
        } catch (...) {
            throw CoeffDbError("malformed record: " + line);
        }
        ++seen;
    }
    if (seen != declared) throw CoeffDbError("malformed: truncated (declared " + std::to_string(declared) +
                                             " records, found " + std::to_string(seen) + ")");
    return db;
}

}  // namespace itofl
