#include "qpb/fidelity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "qpb/errors.hpp"

namespace qpb {

namespace {

const CountsTable& setting_counts(const std::map<std::string, CountsTable>& by_setting,
                                  const std::string& id) {
    auto it = by_setting.find(id);
    if (it == by_setting.end()) throw InvalidArgument("missing setting '" + id + "'");
    if (it->second.shots == 0) throw InvalidArgument("setting '" + id + "' has zero shots");
    return it->second;
}

int popcount_bits(const std::string& bits) {
    return static_cast<int>(std::count(bits.begin(), bits.end(), '1'));
}

// <product of (-1)^bit> over the counts, with its binomial variance.
std::pair<double, double> parity_expectation(const CountsTable& counts) {
    std::int64_t signed_sum = 0;
    for (const auto& [bits, n] : counts.counts) {
        signed_sum += (popcount_bits(bits) % 2 == 0) ? static_cast<std::int64_t>(n)
                                                     : -static_cast<std::int64_t>(n);
    }
    const double e = static_cast<double>(signed_sum) / static_cast<double>(counts.shots);
    const double var = (1.0 - e * e) / static_cast<double>(counts.shots);
    return {e, std::max(var, 0.0)};
}

FidelityValue clamp01(double value, double stderr_) {
    FidelityValue out;
    out.stderr_ = stderr_;
    out.value = value;
    if (value < 0.0 || value > 1.0) {
        out.value = std::clamp(value, 0.0, 1.0);
        out.clamped = true;
    }
    return out;
}

}  // namespace

double estimate_state_fidelity(const CountsTable& counts, const AxialSetting& setting) {
    if (counts.shots == 0) throw InvalidArgument("cannot estimate fidelity from zero shots");
    const char expected = setting.positive ? '0' : '1';
    std::uint64_t matched = 0;
    for (const auto& [bits, n] : counts.counts) {
        if (std::all_of(bits.begin(), bits.end(), [&](char c) { return c == expected; })) {
            matched += n;
        }
    }
    return static_cast<double>(matched) / static_cast<double>(counts.shots);
}

FidelityValue estimate_bell_fidelity(const std::map<std::string, CountsTable>& by_setting) {
    const auto [xx, var_xx] = parity_expectation(setting_counts(by_setting, "xx"));
    const auto [yy, var_yy] = parity_expectation(setting_counts(by_setting, "yy"));
    const auto [zz, var_zz] = parity_expectation(setting_counts(by_setting, "zz"));
    const double f = (1.0 + xx - yy + zz) / 4.0;
    const double stderr_ = std::sqrt(var_xx + var_yy + var_zz) / 4.0;
    return clamp01(f, stderr_);
}

FidelityValue estimate_ghz_fidelity(const std::map<std::string, CountsTable>& by_setting,
                                    int m) {
    const CountsTable& pop = setting_counts(by_setting, "pop");
    const std::string all0(pop.num_bits, '0');
    const std::string all1(pop.num_bits, '1');
    std::uint64_t extreme = 0;
    if (auto it = pop.counts.find(all0); it != pop.counts.end()) extreme += it->second;
    if (auto it = pop.counts.find(all1); it != pop.counts.end()) extreme += it->second;
    const double population = static_cast<double>(extreme) / static_cast<double>(pop.shots);
    const double var_pop =
        population * (1.0 - population) / static_cast<double>(pop.shots);

    double filtered = 0.0;
    double var_sum = 0.0;
    for (int k = 0; k < m; ++k) {
        const auto [e, var] =
            parity_expectation(setting_counts(by_setting, "par" + std::to_string(k)));
        filtered += (k % 2 == 0 ? e : -e);
        var_sum += var;
    }
    const double coherence = std::abs(filtered) / m;
    const double var_coh = var_sum / (static_cast<double>(m) * m);
    const double f = population / 2.0 + coherence / 2.0;
    const double stderr_ = 0.5 * std::sqrt(var_pop + var_coh);
    return clamp01(f, stderr_);
}

FidelityValue estimate_instance_fidelity(const ProtocolId& id,
                                         const std::map<std::string, CountsTable>& by_setting) {
    switch (id.kind) {
        case ProtocolKind::BellTransfer: return estimate_bell_fidelity(by_setting);
        case ProtocolKind::CatState: return estimate_ghz_fidelity(by_setting, id.params.m);
        default: break;
    }
    // 6-state average of the per-setting match fractions.
    double sum = 0.0;
    double var_sum = 0.0;
    const auto ids = settings_for(id);
    for (std::size_t i = 0; i < ids.size(); ++i) {
        const CountsTable& counts = setting_counts(by_setting, ids[i]);
        const double f = estimate_state_fidelity(counts, axial_settings()[i]);
        sum += f;
        var_sum += f * (1.0 - f) / static_cast<double>(counts.shots);
    }
    FidelityValue out;
    out.value = sum / static_cast<double>(ids.size());
    out.stderr_ = std::sqrt(var_sum) / static_cast<double>(ids.size());
    return out;
}

AggregationKey AggregationKey::per_qubit(QubitId q) {
    AggregationKey k;
    k.kind = Kind::Qubit;
    k.qubit = q;
    return k;
}

AggregationKey AggregationKey::per_camp(std::vector<QubitId> camp) {
    AggregationKey k;
    k.kind = Kind::Camp;
    std::sort(camp.begin(), camp.end());
    k.camp = std::move(camp);
    return k;
}

AggregationKey AggregationKey::per_rectangle(int index) {
    AggregationKey k;
    k.kind = Kind::Rectangle;
    k.rectangle = index;
    return k;
}

std::string AggregationKey::text() const {
    switch (kind) {
        case Kind::Qubit: return "q" + std::to_string(qubit);
        case Kind::Camp: {
            std::ostringstream os;
            os << '{';
            for (std::size_t i = 0; i < camp.size(); ++i) {
                if (i) os << ',';
                os << camp[i];
            }
            os << '}';
            return os.str();
        }
        case Kind::Rectangle: return "r" + std::to_string(rectangle);
    }
    return "?";
}

bool AggregationKey::operator<(const AggregationKey& other) const {
    if (kind != other.kind) return kind < other.kind;
    switch (kind) {
        case Kind::Qubit: return qubit < other.qubit;
        case Kind::Camp: return camp < other.camp;
        case Kind::Rectangle: return rectangle < other.rectangle;
    }
    return false;
}

bool AggregationKey::operator==(const AggregationKey& other) const {
    return !(*this < other) && !(other < *this);
}

std::vector<FidelityEstimate> aggregate(const std::vector<FidelityRecord>& records,
                                        AggregationKey::Kind keying) {
    if (records.empty()) throw InvalidArgument("nothing to aggregate");

    struct Group {
        double sum = 0.0;
        double min = std::numeric_limits<double>::infinity();
        double max = -std::numeric_limits<double>::infinity();
        double var_sum = 0.0;
        std::size_t n = 0;
    };
    std::map<AggregationKey, Group> groups;
    auto feed = [&](const AggregationKey& key, const FidelityRecord& r) {
        Group& g = groups[key];
        g.sum += r.fidelity;
        g.min = std::min(g.min, r.fidelity);
        g.max = std::max(g.max, r.fidelity);
        g.var_sum += r.stderr_ * r.stderr_;
        ++g.n;
    };

    for (const FidelityRecord& r : records) {
        switch (keying) {
            case AggregationKey::Kind::Qubit:
                for (QubitId q : r.camp) feed(AggregationKey::per_qubit(q), r);
                break;
            case AggregationKey::Kind::Camp:
                feed(AggregationKey::per_camp(r.camp), r);
                break;
            case AggregationKey::Kind::Rectangle:
                feed(AggregationKey::per_rectangle(r.rectangle), r);
                break;
        }
    }

    std::vector<FidelityEstimate> out;
    out.reserve(groups.size());
    for (const auto& [key, g] : groups) {
        FidelityEstimate e;
        e.key = key;
        e.mean = g.sum / static_cast<double>(g.n);
        e.min = g.min;
        e.max = g.max;
        e.stderr_ = std::sqrt(g.var_sum) / static_cast<double>(g.n);
        e.n_circuits = g.n;
        out.push_back(std::move(e));
    }
    return out;
}

std::vector<std::pair<AggregationKey, bool>> stage_pass(
    const std::vector<FidelityEstimate>& estimates, double threshold) {
    std::vector<std::pair<AggregationKey, bool>> out;
    out.reserve(estimates.size());
    for (const FidelityEstimate& e : estimates) {
        out.emplace_back(e.key, e.min >= threshold);
    }
    return out;
}

}  // namespace qpb
