#include "fsard/serialize.hpp"

#include "fsard/error.hpp"

#include <fmt/format.h>

#include <cmath>
#include <ostream>
#include <string>

#ifndef FSARD_VERSION
#define FSARD_VERSION "0.0.0"
#endif

namespace fsard {

namespace {

std::string csv_escape(const std::string &field) {
    if (field.find_first_of(",\"\n") == std::string::npos) return field;
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

std::string join_numbers(const std::vector<double> &values) {
    std::string out;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i) out += ';';
        out += format_number(values[i]);
    }
    return out;
}

} // namespace

std::string_view library_version() { return FSARD_VERSION; }

std::string format_number(double value) {
    if (std::isnan(value)) return "nan";
    if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
    return fmt::format("{:.10g}", value);
}

Json json_number(double value) {
    if (!std::isfinite(value)) return nullptr;
    return std::stod(fmt::format("{:.10g}", value));
}

Json to_json(const ProtocolConfig &config) {
    return Json{{"N", config.users},
                {"M", config.frame_size},
                {"V", config.mini_slots},
                {"rho", json_number(config.rho)},
                {"gamma", json_number(config.gamma)}};
}

Json to_json(const AlohaConfig &config) {
    return Json{{"N", config.users}, {"rho", json_number(config.rho)}, {"tau", json_number(config.tau)}};
}

Json to_json(const SchemeSpec &scheme) {
    Json out{{"scheme", std::string(to_string(scheme.kind()))}};
    const Json params = scheme.is_framed() ? to_json(scheme.protocol()) : to_json(scheme.aloha());
    for (const auto &[key, value] : params.items()) out[key] = value;
    return out;
}

Json to_json(const SlotProfile &profile) {
    Json phi = Json::array();
    for (double v : profile.by_slot) phi.push_back(json_number(v));
    return Json{{"p_s", json_number(profile.p_success)}, {"phi", phi}};
}

Json to_json(const MomentDecomposition &m) {
    return Json{{"e_W", json_number(m.e_W)},   {"e_W2", json_number(m.e_W2)}, {"e_K", json_number(m.e_K)},
                {"e_K2", json_number(m.e_K2)}, {"e_Y", json_number(m.e_Y)},   {"e_Y2", json_number(m.e_Y2)},
                {"e_S", json_number(m.e_S)},   {"e_l", json_number(m.e_l)},   {"e_Z", json_number(m.e_Z)},
                {"e_alpha", json_number(m.e_alpha)}};
}

Json to_json(const AnalysisReport &report) {
    Json out = to_json(report.scheme == Scheme::fsa_rd ? SchemeSpec::fsa_rd(report.config)
                                                       : SchemeSpec::fsa_rd_one(report.config));
    out["aaoi"] = json_number(report.aaoi);
    out["upper_bound"] = report.upper_bound ? json_number(*report.upper_bound) : Json(nullptr);
    out["effectively_infinite"] = report.effectively_infinite;
    out["profile"] = to_json(report.profile);
    out["moments"] = to_json(report.moments);
    return out;
}

Json to_json(const EmpiricalMoments &m) {
    Json out = to_json(m.moments);
    out["var_alpha"] = json_number(m.var_alpha);
    out["e_X"] = json_number(m.e_X);
    out["e_X2"] = json_number(m.e_X2);
    out["e_SX"] = json_number(m.e_SX);
    out["receptions"] = m.receptions;
    out["pairs"] = m.pairs;
    out["x2_identity_residual"] = json_number(m.lemma1_residual);
    out["x2_identity_stderr"] = json_number(m.lemma1_stderr);
    out["sx_identity_residual"] = json_number(m.lemma2_residual);
    out["sx_identity_stderr"] = json_number(m.lemma2_stderr);
    out["e_K_stderr"] = json_number(m.e_K_stderr);
    return out;
}

Json to_json(const FrameStats &frames) {
    return Json{{"frames", frames.frames},
                {"active_histogram", frames.active_histogram},
                {"reservations", frames.reservations},
                {"reservation_wins", frames.reservation_wins}};
}

Json to_json(const SimResult &result) {
    Json out = to_json(result.scheme);
    out["horizon_slots"] = result.horizon_slots;
    out["warmup_slots"] = result.warmup_slots;
    out["seed"] = result.seed;
    out["network_aaoi"] = json_number(result.network_aaoi);
    out["ci_halfwidth"] = json_number(result.ci_halfwidth);
    out["reception_count"] = result.reception_count;
    Json per_user = Json::array();
    for (double v : result.per_user_aaoi) per_user.push_back(json_number(v));
    out["per_user_aaoi"] = per_user;
    if (result.trace) {
        try {
            out["empirical_moments"] = to_json(empirical_moment_report(result));
        } catch (const InsufficientSamplesError &) {
            out["empirical_moments"] = nullptr;
        }
    }
    if (result.frames) out["frames"] = to_json(*result.frames);
    return out;
}

Json to_json(const OptimizationResult &result) {
    Json out{{"scheme", std::string(to_string(result.scheme))}};
    if (result.scheme == Scheme::slotted_aloha) {
        out["best_tau"] = json_number(result.best_param);
    } else {
        out["best_gamma"] = json_number(result.best_param);
        out["best_M"] = result.best_frame_size;
    }
    out["best_aaoi"] = json_number(result.best_aaoi);
    if (result.scheme == Scheme::slotted_aloha) {
        out["best_halfwidth"] = json_number(result.best_halfwidth);
        out["ambiguous"] = result.ambiguous;
    }
    out["points"] = result.trace.size();
    return out;
}

void write_csv_preamble(std::ostream &out, const Json &spec) {
    out << "# fsard-csv v1\n";
    out << "# version: " << library_version() << '\n';
    out << "# spec: " << spec.dump() << '\n';
}

void write_csv_line(std::ostream &out, const std::vector<std::string> &fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) out << ',';
        out << csv_escape(fields[i]);
    }
    out << '\n';
}

std::vector<std::string> analysis_csv_header() {
    return {"scheme", "N",   "M",    "V",   "rho",  "gamma", "p_s", "aaoi", "upper_bound", "e_W", "e_W2", "e_K",
            "e_K2",   "e_Y", "e_Y2", "e_S", "e_l", "e_Z",   "e_alpha", "effectively_infinite", "phi"};
}

std::vector<std::string> analysis_csv_row(const AnalysisReport &r) {
    const auto &c = r.config;
    const auto &m = r.moments;
    return {std::string(to_string(r.scheme)),
            std::to_string(c.users),
            std::to_string(c.frame_size),
            std::to_string(c.mini_slots),
            format_number(c.rho),
            format_number(c.gamma),
            format_number(r.profile.p_success),
            format_number(r.aaoi),
            r.upper_bound ? format_number(*r.upper_bound) : std::string(),
            format_number(m.e_W),
            format_number(m.e_W2),
            format_number(m.e_K),
            format_number(m.e_K2),
            format_number(m.e_Y),
            format_number(m.e_Y2),
            format_number(m.e_S),
            format_number(m.e_l),
            format_number(m.e_Z),
            format_number(m.e_alpha),
            r.effectively_infinite ? "1" : "0",
            join_numbers(r.profile.by_slot)};
}

std::vector<std::string> simulation_csv_header() {
    return {"scheme", "N",       "M",      "V",      "rho",          "gamma",        "tau",
            "replication", "seed", "horizon", "warmup", "network_aaoi", "ci_halfwidth", "reception_count"};
}

std::vector<std::string> simulation_csv_row(const SimResult &r, int replication) {
    std::vector<std::string> row{std::string(to_string(r.scheme.kind()))};
    if (r.scheme.is_framed()) {
        const auto &c = r.scheme.protocol();
        row.insert(row.end(), {std::to_string(c.users), std::to_string(c.frame_size), std::to_string(c.mini_slots),
                               format_number(c.rho), format_number(c.gamma), ""});
    } else {
        const auto &c = r.scheme.aloha();
        row.insert(row.end(), {std::to_string(c.users), "", "", format_number(c.rho), "", format_number(c.tau)});
    }
    row.insert(row.end(), {replication < 0 ? "mean" : std::to_string(replication), std::to_string(r.seed),
                           std::to_string(r.horizon_slots), std::to_string(r.warmup_slots),
                           format_number(r.network_aaoi), format_number(r.ci_halfwidth),
                           std::to_string(r.reception_count)});
    return row;
}

std::vector<std::string> search_csv_header() {
    return {"scheme", "N", "V", "rho", "M", "param", "aaoi", "halfwidth"};
}

std::vector<std::string> search_csv_row(Scheme scheme, int users, int mini_slots, double rho, const SearchPoint &p) {
    const bool framed = scheme != Scheme::slotted_aloha;
    return {std::string(to_string(scheme)),
            std::to_string(users),
            framed ? std::to_string(mini_slots) : std::string(),
            format_number(rho),
            framed ? std::to_string(p.frame_size) : std::string(),
            format_number(p.param),
            format_number(p.aaoi),
            format_number(p.halfwidth)};
}

} // namespace fsard
