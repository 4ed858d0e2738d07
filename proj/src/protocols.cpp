#include "qpb/protocols.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>
#include <sstream>

#include "qpb/errors.hpp"

namespace qpb {

int ProtocolId::work_qubits() const {
    switch (kind) {
        case ProtocolKind::Transmit:
        case ProtocolKind::DoNothing: return 1;
        case ProtocolKind::BellTransfer: return 2;
        case ProtocolKind::GenTransmit:
        case ProtocolKind::GenDoNothing:
        case ProtocolKind::CatState: return params.m;
    }
    return 1;
}

void ProtocolId::validate() const {
    switch (kind) {
        case ProtocolKind::GenTransmit:
        case ProtocolKind::GenDoNothing:
            if (params.m < 2 || params.m > 3) {
                throw ConfigError(protocol_name(*this) + ": M must be 2 or 3");
            }
            break;
        case ProtocolKind::CatState:
            if (params.m < 3 || params.m > 4) {
                throw ConfigError("cat_state: M must be 3 or 4");
            }
            if (params.j != 2) {
                throw ConfigError("cat_state: only J = 2 is supported");
            }
            break;
        default: break;
    }
}

std::string protocol_name(const ProtocolId& id) {
    switch (id.kind) {
        case ProtocolKind::Transmit: return "transmit";
        case ProtocolKind::DoNothing: return "do_nothing";
        case ProtocolKind::BellTransfer: return "bell_transfer";
        case ProtocolKind::GenTransmit: return "gen_transmit_m" + std::to_string(id.params.m);
        case ProtocolKind::GenDoNothing: return "gen_do_nothing_m" + std::to_string(id.params.m);
        case ProtocolKind::CatState:
            return "cat_state_m" + std::to_string(id.params.m) + "_j" +
                   std::to_string(id.params.j);
    }
    return "?";
}

ProtocolId protocol_from_name(const std::string& name) {
    auto starts = [&](const char* prefix) { return name.rfind(prefix, 0) == 0; };
    ProtocolId id;
    if (name == "transmit") {
        id.kind = ProtocolKind::Transmit;
    } else if (name == "do_nothing") {
        id.kind = ProtocolKind::DoNothing;
    } else if (name == "bell_transfer") {
        id.kind = ProtocolKind::BellTransfer;
    } else if (starts("gen_transmit_m")) {
        id.kind = ProtocolKind::GenTransmit;
        id.params.m = std::stoi(name.substr(std::string("gen_transmit_m").size()));
    } else if (starts("gen_do_nothing_m")) {
        id.kind = ProtocolKind::GenDoNothing;
        id.params.m = std::stoi(name.substr(std::string("gen_do_nothing_m").size()));
    } else if (starts("cat_state_m")) {
        id.kind = ProtocolKind::CatState;
        const auto jpos = name.find("_j");
        if (jpos == std::string::npos) throw ConfigError("bad cat_state id '" + name + "'");
        id.params.m = std::stoi(name.substr(std::string("cat_state_m").size(),
                                            jpos - std::string("cat_state_m").size()));
        id.params.j = std::stoi(name.substr(jpos + 2));
    } else {
        throw ConfigError("unknown protocol '" + name + "'");
    }
    id.validate();
    return id;
}

std::string protocol_label(const ProtocolId& id) {
    switch (id.kind) {
        case ProtocolKind::Transmit: return "Transmit";
        case ProtocolKind::DoNothing: return "Do-nothing";
        case ProtocolKind::BellTransfer: return "Bell-state transfer";
        case ProtocolKind::GenTransmit:
            return "Generalized transmit M=" + std::to_string(id.params.m);
        case ProtocolKind::GenDoNothing:
            return "Generalized do-nothing M=" + std::to_string(id.params.m);
        case ProtocolKind::CatState:
            return "Cat state J=" + std::to_string(id.params.j) +
                   ",M=" + std::to_string(id.params.m);
    }
    return "?";
}

double threshold_for(const ProtocolId& id) {
    auto ipow = [](double base, int exp) {
        double out = 1.0;
        for (int i = 0; i < exp; ++i) out *= base;
        return out;
    };
    switch (id.kind) {
        case ProtocolKind::Transmit:
        case ProtocolKind::DoNothing: return 2.0 / 3.0;
        case ProtocolKind::BellTransfer: return 0.5;
        case ProtocolKind::GenTransmit:
        case ProtocolKind::GenDoNothing:
            return ipow(2.0, id.params.m) / ipow(3.0, id.params.m);
        case ProtocolKind::CatState: return 0.5;  // GHZ entanglement witness
    }
    return 1.0;
}

const std::vector<AxialSetting>& axial_settings() {
    static const std::vector<AxialSetting> kSettings = {
        {Axis::Z, true}, {Axis::Z, false}, {Axis::X, true},
        {Axis::X, false}, {Axis::Y, true}, {Axis::Y, false},
    };
    return kSettings;
}

std::string setting_id(const AxialSetting& s) {
    std::string out;
    out += (s.axis == Axis::X ? 'x' : s.axis == Axis::Y ? 'y' : 'z');
    out += (s.positive ? '+' : '-');
    return out;
}

std::string setting_id(BellSetting s) {
    switch (s) {
        case BellSetting::XX: return "xx";
        case BellSetting::YY: return "yy";
        case BellSetting::ZZ: return "zz";
    }
    return "?";
}

std::string setting_id(const CatSetting& s) {
    return s.population ? "pop" : "par" + std::to_string(s.k);
}

std::vector<std::string> settings_for(const ProtocolId& id) {
    std::vector<std::string> out;
    switch (id.kind) {
        case ProtocolKind::Transmit:
        case ProtocolKind::DoNothing:
        case ProtocolKind::GenTransmit:
        case ProtocolKind::GenDoNothing:
            for (const AxialSetting& s : axial_settings()) out.push_back(setting_id(s));
            break;
        case ProtocolKind::BellTransfer:
            out = {"xx", "yy", "zz"};
            break;
        case ProtocolKind::CatState:
            out.push_back("pop");
            for (int k = 0; k < id.params.m; ++k) out.push_back("par" + std::to_string(k));
            break;
    }
    return out;
}

namespace {

std::string join_ids(const std::vector<QubitId>& qubits, char sep = '-') {
    std::ostringstream os;
    for (std::size_t i = 0; i < qubits.size(); ++i) {
        if (i) os << sep;
        os << qubits[i];
    }
    return os.str();
}

// Appends the swap chains of all routes in order, refusing to cross an
// occupied position. `occupied` holds the current position of every work
// qubit plus any static participants.
void append_transfer_chains(Circuit& c, const std::vector<std::vector<QubitId>>& routes,
                            std::set<QubitId>& occupied) {
    for (const auto& route : routes) {
        if (route.size() < 2) continue;  // degenerate stay-in-place route
        occupied.erase(route.front());
        for (std::size_t i = 0; i + 1 < route.size(); ++i) {
            if (occupied.count(route[i + 1])) {
                throw InvalidArgument("transfer chains collide at qubit " +
                                      std::to_string(route[i + 1]));
            }
            c.gates.push_back(swap_gate(route[i], route[i + 1]));
        }
        occupied.insert(route.back());
    }
}

// Undoes the chains: every work qubit returns home, last mover first.
void append_return_chains(Circuit& c, const std::vector<std::vector<QubitId>>& routes,
                          std::set<QubitId>& occupied) {
    for (auto rit = routes.rbegin(); rit != routes.rend(); ++rit) {
        const auto& route = *rit;
        if (route.size() < 2) continue;
        occupied.erase(route.back());
        for (std::size_t i = route.size() - 1; i > 0; --i) {
            if (occupied.count(route[i - 1])) {
                throw InvalidArgument("return chains collide at qubit " +
                                      std::to_string(route[i - 1]));
            }
            c.gates.push_back(swap_gate(route[i], route[i - 1]));
        }
        occupied.insert(route.front());
    }
}

std::set<QubitId> route_starts(const std::vector<std::vector<QubitId>>& routes) {
    std::set<QubitId> s;
    for (const auto& r : routes) {
        if (r.empty()) throw InvalidArgument("empty transfer route");
        s.insert(r.front());
    }
    if (s.size() != routes.size()) throw InvalidArgument("transfer routes share a start qubit");
    return s;
}

Gate measurement_rotation(QubitId q, const AxialSetting& s) {
    switch (s.axis) {
        case Axis::X: return basis_change(q, BasisKind::X);
        case Axis::Y: return basis_change(q, BasisKind::Y);
        case Axis::Z: return basis_change(q, BasisKind::Z);
    }
    return basis_change(q, BasisKind::Z);
}

}  // namespace

Circuit build_transmit(const QubitPath& path, const AxialSetting& setting) {
    if (path.qubits.size() < 2) {
        throw InvalidArgument("transmit needs a path of at least two qubits");
    }
    Circuit c;
    c.gates.push_back(prep_axial(path.qubits.front(), setting.axis, setting.positive));
    std::set<QubitId> occupied{path.qubits.front()};
    append_transfer_chains(c, {path.qubits}, occupied);
    c.gates.push_back(measurement_rotation(path.qubits.back(), setting));
    c.measured = {path.qubits.back()};
    return c;
}

Circuit build_do_nothing(const QubitPath& path, const AxialSetting& setting) {
    if (path.qubits.size() < 2) {
        throw InvalidArgument("do-nothing needs a path of at least two qubits");
    }
    Circuit c;
    c.gates.push_back(prep_axial(path.qubits.front(), setting.axis, setting.positive));
    std::set<QubitId> occupied{path.qubits.front()};
    append_transfer_chains(c, {path.qubits}, occupied);
    append_return_chains(c, {path.qubits}, occupied);
    c.gates.push_back(measurement_rotation(path.qubits.front(), setting));
    c.measured = {path.qubits.front()};
    return c;
}

Circuit build_bell_transfer(std::pair<QubitId, QubitId> alice, std::pair<QubitId, QubitId> bob,
                            const std::vector<std::vector<QubitId>>& routes,
                            BellSetting setting) {
    if (routes.size() != 2) throw InvalidArgument("bell transfer needs exactly two routes");
    if (alice.first == alice.second || bob.first == bob.second) {
        throw InvalidArgument("bell transfer endpoints must be distinct");
    }
    std::set<QubitId> ends{routes[0].back(), routes[1].back()};
    if (ends != std::set<QubitId>{bob.first, bob.second}) {
        throw InvalidArgument("bell transfer routes do not end at Bob's camp");
    }
    Circuit c;
    c.gates.push_back(hadamard(alice.first));
    c.gates.push_back(cx(alice.first, alice.second));
    std::set<QubitId> occupied{alice.first, alice.second};
    append_transfer_chains(c, routes, occupied);
    std::vector<QubitId> measured{bob.first, bob.second};
    std::sort(measured.begin(), measured.end());
    for (QubitId q : measured) {
        switch (setting) {
            case BellSetting::XX: c.gates.push_back(basis_change(q, BasisKind::X)); break;
            case BellSetting::YY: c.gates.push_back(basis_change(q, BasisKind::Y)); break;
            case BellSetting::ZZ: c.gates.push_back(basis_change(q, BasisKind::Z)); break;
        }
    }
    c.measured = measured;
    return c;
}

Circuit build_gen_transmit(const std::vector<std::vector<QubitId>>& routes,
                           const AxialSetting& setting) {
    if (routes.size() < 2) throw InvalidArgument("generalized transmit needs M >= 2 routes");
    Circuit c;
    for (const auto& r : routes) {
        c.gates.push_back(prep_axial(r.front(), setting.axis, setting.positive));
    }
    std::set<QubitId> occupied = route_starts(routes);
    append_transfer_chains(c, routes, occupied);
    std::vector<QubitId> measured;
    for (const auto& r : routes) measured.push_back(r.back());
    std::sort(measured.begin(), measured.end());
    for (QubitId q : measured) c.gates.push_back(measurement_rotation(q, setting));
    c.measured = measured;
    return c;
}

Circuit build_gen_do_nothing(const std::vector<std::vector<QubitId>>& routes,
                             const AxialSetting& setting) {
    if (routes.size() < 2) throw InvalidArgument("generalized do-nothing needs M >= 2 routes");
    Circuit c;
    for (const auto& r : routes) {
        c.gates.push_back(prep_axial(r.front(), setting.axis, setting.positive));
    }
    std::set<QubitId> occupied = route_starts(routes);
    append_transfer_chains(c, routes, occupied);
    append_return_chains(c, routes, occupied);
    std::vector<QubitId> measured;
    for (const auto& r : routes) measured.push_back(r.front());
    std::sort(measured.begin(), measured.end());
    for (QubitId q : measured) c.gates.push_back(measurement_rotation(q, setting));
    c.measured = measured;
    return c;
}

Circuit build_cat_state(const std::vector<QubitId>& ghz_camp,
                        const std::vector<std::vector<QubitId>>& transfer_routes,
                        const CatSetting& setting) {
    const int m = static_cast<int>(ghz_camp.size());
    if (m < 3) throw InvalidArgument("cat state needs M >= 3 qubits");
    if (transfer_routes.size() != 2) {
        throw InvalidArgument("cat state transfers exactly J = 2 qubits");
    }
    Circuit c;
    c.gates.push_back(hadamard(ghz_camp.front()));
    for (int i = 0; i + 1 < m; ++i) {
        c.gates.push_back(cx(ghz_camp[i], ghz_camp[i + 1]));
    }
    std::set<QubitId> occupied(ghz_camp.begin(), ghz_camp.end());
    append_transfer_chains(c, transfer_routes, occupied);

    std::vector<QubitId> measured(ghz_camp.begin(), ghz_camp.end() - 2);
    for (const auto& r : transfer_routes) measured.push_back(r.back());
    std::sort(measured.begin(), measured.end());
    if (setting.population) {
        for (QubitId q : measured) c.gates.push_back(basis_change(q, BasisKind::Z));
    } else {
        const double phi = setting.k * std::numbers::pi / m;
        for (QubitId q : measured) c.gates.push_back(parity_phase(q, phi));
    }
    c.measured = measured;
    return c;
}

// ---------------------------------------------------------------------------
// Instances

std::string path_id_from_flat(const ProtocolId& id, const std::vector<QubitId>& flat) {
    std::size_t split = 0;
    switch (id.kind) {
        case ProtocolKind::Transmit:
        case ProtocolKind::DoNothing: return join_ids(flat);
        case ProtocolKind::BellTransfer: split = 2; break;
        case ProtocolKind::GenTransmit:
        case ProtocolKind::GenDoNothing: split = flat.size() / 2; break;
        case ProtocolKind::CatState: split = static_cast<std::size_t>(id.params.m); break;
    }
    if (split == 0 || split >= flat.size()) return join_ids(flat);
    const std::vector<QubitId> from(flat.begin(), flat.begin() + split);
    const std::vector<QubitId> to(flat.begin() + split, flat.end());
    return join_ids(from) + ">" + join_ids(to);
}

namespace {

ProtocolInstance finish_instance(ProtocolInstance inst) {
    std::set<QubitId> touched(inst.ghz_camp.begin(), inst.ghz_camp.end());
    for (const auto& r : inst.routes) touched.insert(r.begin(), r.end());
    inst.touched.assign(touched.begin(), touched.end());
    std::sort(inst.measured_camp.begin(), inst.measured_camp.end());
    return inst;
}

std::vector<QubitId> slice(const std::vector<QubitId>& v, std::size_t from, std::size_t to) {
    return {v.begin() + from, v.begin() + to + 1};
}

}  // namespace

std::optional<ProtocolInstance> lattice_instance(const ProtocolId& id, const QubitPath& master,
                                                 int rectangle) {
    const auto& p = master.qubits;
    const std::size_t len = p.size();
    const std::size_t m = static_cast<std::size_t>(id.params.m);

    ProtocolInstance inst;
    inst.id = id;
    inst.rectangle = rectangle;
    inst.flat_path = p;
    inst.path_id = join_ids(p);

    switch (id.kind) {
        case ProtocolKind::Transmit:
            if (len < 2) return std::nullopt;
            inst.routes = {p};
            inst.measured_camp = {p.back()};
            break;
        case ProtocolKind::DoNothing:
            if (len < 2) return std::nullopt;
            inst.routes = {p};
            inst.measured_camp = {p.front()};
            break;
        case ProtocolKind::BellTransfer:
            // Pair prepared on the first two path qubits, delivered onto the
            // last two; the forward half moves first so the chains never meet.
            if (len < 4) return std::nullopt;
            inst.routes = {slice(p, 1, len - 1), slice(p, 0, len - 2)};
            inst.measured_camp = {p[len - 2], p[len - 1]};
            break;
        case ProtocolKind::GenTransmit: {
            if (len < 2 * m) return std::nullopt;
            for (std::size_t i = m; i-- > 0;) {
                inst.routes.push_back(slice(p, i, len - m + i));
            }
            inst.measured_camp.assign(p.end() - m, p.end());
            break;
        }
        case ProtocolKind::GenDoNothing: {
            if (len < m + 1) return std::nullopt;
            for (std::size_t i = m; i-- > 0;) {
                inst.routes.push_back(slice(p, i, len - m + i));
            }
            inst.measured_camp.assign(p.begin(), p.begin() + m);
            break;
        }
        case ProtocolKind::CatState: {
            if (len < m + 2) return std::nullopt;
            inst.ghz_camp.assign(p.begin(), p.begin() + m);
            inst.routes = {slice(p, m - 1, len - 1), slice(p, m - 2, len - 2)};
            inst.measured_camp.assign(p.begin(), p.begin() + m - 2);
            inst.measured_camp.push_back(p[len - 2]);
            inst.measured_camp.push_back(p[len - 1]);
            break;
        }
    }
    return finish_instance(std::move(inst));
}

std::vector<ProtocolInstance> ion_pair_instances(const ProtocolId& id,
                                                 const std::vector<QubitId>& qubits) {
    if (id.kind != ProtocolKind::Transmit && id.kind != ProtocolKind::DoNothing) {
        throw InvalidArgument("pair instances exist only for transmit and do-nothing");
    }
    std::vector<ProtocolInstance> out;
    for (QubitId a : qubits) {
        for (QubitId b : qubits) {
            if (a == b) continue;
            ProtocolInstance inst;
            inst.id = id;
            inst.routes = {{a, b}};
            inst.measured_camp = {id.kind == ProtocolKind::Transmit ? b : a};
            inst.flat_path = {a, b};
            inst.path_id = path_id_from_flat(id, inst.flat_path);
            out.push_back(finish_instance(std::move(inst)));
        }
    }
    return out;
}

namespace {

void subsets_of(const std::vector<QubitId>& pool, std::size_t k, std::size_t start,
                std::vector<QubitId>& current, std::vector<std::vector<QubitId>>& out) {
    if (current.size() == k) {
        out.push_back(current);
        return;
    }
    for (std::size_t i = start; i < pool.size(); ++i) {
        current.push_back(pool[i]);
        subsets_of(pool, k, i + 1, current, out);
        current.pop_back();
    }
}

std::vector<std::vector<QubitId>> sorted_subsets(const std::vector<QubitId>& pool,
                                                 std::size_t k) {
    std::vector<QubitId> sorted_pool = pool;
    std::sort(sorted_pool.begin(), sorted_pool.end());
    std::vector<std::vector<QubitId>> out;
    std::vector<QubitId> current;
    subsets_of(sorted_pool, k, 0, current, out);
    return out;
}

std::vector<QubitId> set_minus(const std::vector<QubitId>& pool,
                               const std::vector<QubitId>& removed) {
    std::vector<QubitId> out;
    for (QubitId q : pool) {
        if (std::find(removed.begin(), removed.end(), q) == removed.end()) out.push_back(q);
    }
    return out;
}

}  // namespace

std::vector<ProtocolInstance> ion_camp_instances(const ProtocolId& id,
                                                 const std::vector<QubitId>& qubits,
                                                 std::size_t partner_limit) {
    std::vector<ProtocolInstance> out;
    const std::size_t m = static_cast<std::size_t>(id.work_qubits());

    switch (id.kind) {
        case ProtocolKind::Transmit:
        case ProtocolKind::DoNothing:
            return ion_pair_instances(id, qubits);

        case ProtocolKind::BellTransfer:
        case ProtocolKind::GenTransmit: {
            // Receiving camps aggregate the results, so they drive the outer
            // loop; sending camps are the enumerated partners.
            for (const auto& bob : sorted_subsets(qubits, m)) {
                const auto partners = sorted_subsets(set_minus(qubits, bob), m);
                std::size_t taken = 0;
                for (const auto& alice : partners) {
                    if (partner_limit && taken == partner_limit) break;
                    ++taken;
                    ProtocolInstance inst;
                    inst.id = id;
                    for (std::size_t i = 0; i < m; ++i) {
                        inst.routes.push_back({alice[i], bob[i]});
                    }
                    inst.measured_camp = bob;
                    inst.flat_path = alice;
                    inst.flat_path.insert(inst.flat_path.end(), bob.begin(), bob.end());
                    inst.path_id = path_id_from_flat(id, inst.flat_path);
                    out.push_back(finish_instance(std::move(inst)));
                }
            }
            break;
        }
        case ProtocolKind::GenDoNothing: {
            // The state returns to the senders, which therefore form the
            // measured camp; the visited camps are the partners.
            for (const auto& alice : sorted_subsets(qubits, m)) {
                const auto partners = sorted_subsets(set_minus(qubits, alice), m);
                std::size_t taken = 0;
                for (const auto& bob : partners) {
                    if (partner_limit && taken == partner_limit) break;
                    ++taken;
                    ProtocolInstance inst;
                    inst.id = id;
                    for (std::size_t i = 0; i < m; ++i) {
                        inst.routes.push_back({alice[i], bob[i]});
                    }
                    inst.measured_camp = alice;
                    inst.flat_path = alice;
                    inst.flat_path.insert(inst.flat_path.end(), bob.begin(), bob.end());
                    inst.path_id = path_id_from_flat(id, inst.flat_path);
                    out.push_back(finish_instance(std::move(inst)));
                }
            }
            break;
        }
        case ProtocolKind::CatState: {
            const std::size_t j = static_cast<std::size_t>(id.params.j);
            for (const auto& camp : sorted_subsets(qubits, m)) {
                const auto dests = sorted_subsets(set_minus(qubits, camp), j);
                std::size_t taken = 0;
                for (const auto& dest : dests) {
                    if (partner_limit && taken == partner_limit) break;
                    ++taken;
                    ProtocolInstance inst;
                    inst.id = id;
                    inst.ghz_camp = camp;
                    for (std::size_t i = 0; i < j; ++i) {
                        inst.routes.push_back({camp[m - j + i], dest[i]});
                    }
                    inst.measured_camp.assign(camp.begin(), camp.end() - j);
                    inst.measured_camp.insert(inst.measured_camp.end(), dest.begin(),
                                              dest.end());
                    inst.flat_path = camp;
                    inst.flat_path.insert(inst.flat_path.end(), dest.begin(), dest.end());
                    inst.path_id = path_id_from_flat(id, inst.flat_path);
                    out.push_back(finish_instance(std::move(inst)));
                }
            }
            break;
        }
    }
    return out;
}

ProtocolInstance ion_instance_from_flat(const ProtocolId& id,
                                        const std::vector<QubitId>& flat) {
    ProtocolInstance inst;
    inst.id = id;
    inst.flat_path = flat;
    inst.path_id = path_id_from_flat(id, flat);
    std::set<QubitId> distinct(flat.begin(), flat.end());
    if (distinct.size() != flat.size()) {
        throw InvalidArgument("layout repeats a qubit");
    }

    const std::size_t m = static_cast<std::size_t>(id.work_qubits());
    switch (id.kind) {
        case ProtocolKind::Transmit:
        case ProtocolKind::DoNothing:
            if (flat.size() != 2) throw InvalidArgument("layout needs exactly 2 qubits");
            inst.routes = {{flat[0], flat[1]}};
            inst.measured_camp = {id.kind == ProtocolKind::Transmit ? flat[1] : flat[0]};
            break;
        case ProtocolKind::BellTransfer:
        case ProtocolKind::GenTransmit:
        case ProtocolKind::GenDoNothing: {
            if (flat.size() != 2 * m) {
                throw InvalidArgument("layout needs " + std::to_string(2 * m) + " qubits");
            }
            for (std::size_t i = 0; i < m; ++i) inst.routes.push_back({flat[i], flat[m + i]});
            if (id.kind == ProtocolKind::GenDoNothing) {
                inst.measured_camp.assign(flat.begin(), flat.begin() + m);
            } else {
                inst.measured_camp.assign(flat.begin() + m, flat.end());
            }
            break;
        }
        case ProtocolKind::CatState: {
            const std::size_t j = static_cast<std::size_t>(id.params.j);
            if (flat.size() != m + j) {
                throw InvalidArgument("layout needs " + std::to_string(m + j) + " qubits");
            }
            inst.ghz_camp.assign(flat.begin(), flat.begin() + m);
            for (std::size_t i = 0; i < j; ++i) {
                inst.routes.push_back({flat[m - j + i], flat[m + i]});
            }
            inst.measured_camp.assign(flat.begin(), flat.begin() + (m - j));
            inst.measured_camp.insert(inst.measured_camp.end(), flat.begin() + m, flat.end());
            break;
        }
    }
    return finish_instance(std::move(inst));
}

std::vector<Circuit> circuits_for_instance(const ProtocolInstance& inst) {
    std::vector<Circuit> out;
    auto stamp = [&](Circuit c, const std::string& setting) {
        c.meta.protocol = protocol_name(inst.id);
        c.meta.path_id = inst.path_id;
        c.meta.setting = setting;
        out.push_back(std::move(c));
    };

    switch (inst.id.kind) {
        case ProtocolKind::Transmit:
            for (const AxialSetting& s : axial_settings()) {
                stamp(build_transmit(QubitPath{inst.routes[0], PathStage::AL}, s),
                      setting_id(s));
            }
            break;
        case ProtocolKind::DoNothing:
            for (const AxialSetting& s : axial_settings()) {
                stamp(build_do_nothing(QubitPath{inst.routes[0], PathStage::AL}, s),
                      setting_id(s));
            }
            break;
        case ProtocolKind::BellTransfer: {
            const std::pair<QubitId, QubitId> alice{inst.routes[1].front(),
                                                    inst.routes[0].front()};
            const std::pair<QubitId, QubitId> bob{inst.routes[1].back(),
                                                  inst.routes[0].back()};
            for (BellSetting s : {BellSetting::XX, BellSetting::YY, BellSetting::ZZ}) {
                stamp(build_bell_transfer(alice, bob, inst.routes, s), setting_id(s));
            }
            break;
        }
        case ProtocolKind::GenTransmit:
            for (const AxialSetting& s : axial_settings()) {
                stamp(build_gen_transmit(inst.routes, s), setting_id(s));
            }
            break;
        case ProtocolKind::GenDoNothing:
            for (const AxialSetting& s : axial_settings()) {
                stamp(build_gen_do_nothing(inst.routes, s), setting_id(s));
            }
            break;
        case ProtocolKind::CatState: {
            stamp(build_cat_state(inst.ghz_camp, inst.routes, CatSetting{true, 0}), "pop");
            for (int k = 0; k < inst.id.params.m; ++k) {
                stamp(build_cat_state(inst.ghz_camp, inst.routes, CatSetting{false, k}),
                      "par" + std::to_string(k));
            }
            break;
        }
    }
    return out;
}

}  // namespace qpb
