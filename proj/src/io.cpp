#include <jellium/io.hpp>

#include <jellium/errors.hpp>

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#ifndef JELLIUM_VERSION
#define JELLIUM_VERSION "unknown"
#endif

namespace jellium {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos)
        return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

bool parse_double(const std::string& text, double& out) {
    const std::string t = trim(text);
    if (t.empty())
        return false;
    const char* first = t.data();
    const char* last = t.data() + t.size();
    if (*first == '+')
        ++first;
    const auto res = std::from_chars(first, last, out);
    return res.ec == std::errc() && res.ptr == last;
}

Json real_or_null(double x) {
    if (std::isfinite(x))
        return x;
    return nullptr;
}

}  // namespace

const char* library_version() {
    return JELLIUM_VERSION;
}

std::string format_real(double x) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::general, 17);
    return std::string(buf, res.ptr);
}

Json to_json(const GasParams& p) {
    return Json{{"n", p.n()}, {"beta", p.beta()}, {"alpha", p.alpha()}, {"R", p.R()}};
}

GasParams params_from_json(const Json& j) {
    try {
        return GasParams(j.at("n").get<int>(), j.at("beta").get<double>(), j.at("alpha").get<double>(),
                         j.at("R").get<double>());
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::InvalidParams, std::string("malformed params object: ") + e.what());
    }
}

Json to_json(const EcdfReport& r) {
    Json params = Json::object();
    for (const auto& [k, v] : r.params)
        params[k] = real_or_null(v);
    Json j;
    j["sample_size"] = r.sample_size;
    j["ks_distance"] = real_or_null(r.ks_distance);
    j["w1_distance"] = real_or_null(r.w1_distance);
    j["reference"] = r.reference;
    j["pass_threshold"] = r.pass_threshold;
    j["passed"] = r.passed;
    j["params"] = params;
    j["seed"] = r.seed ? Json(*r.seed) : Json(nullptr);
    return j;
}

Json to_json(const ChainDiagnostics& d) {
    Json trace = Json::array();
    for (std::size_t i = 0; i < d.energy_trace.size(); ++i)
        trace.push_back(Json{{"step", d.trace_steps[i]}, {"energy", real_or_null(d.energy_trace[i])}});
    return Json{{"acceptance_rate", d.acceptance_rate},
                {"burn_in_acceptance_rate", d.burn_in_acceptance_rate},
                {"final_dt", d.final_dt},
                {"proposed", d.proposed},
                {"accepted", d.accepted},
                {"overflow_count", d.overflow_count},
                {"max_cache_drift", d.max_cache_drift},
                {"energy_trace", trace}};
}

Json to_json(const Schedule& s) {
    return Json{{"steps", s.steps},
                {"burn_in_fraction", s.burn_in_fraction},
                {"thinning", s.thinning},
                {"dt_init", s.dt_init},
                {"target_acceptance", s.target_acceptance},
                {"leapfrog_steps", s.leapfrog_steps},
                {"init", s.init == InitMode::UniformDisc ? "uniform_disc" : "equilibrium_radial"}};
}

Json profile_diagnostics(const EquilibriumProfile& p) {
    Json hist = Json::array();
    for (double v : p.residual_history)
        hist.push_back(real_or_null(v));
    return Json{{"mass", p.mass},
                {"residual", real_or_null(p.residual)},
                {"farfield_exponent", real_or_null(p.farfield_exponent)},
                {"iterations", p.iterations},
                {"support_radius", real_or_null(p.support_radius)},
                {"grid_points", p.grid.size()},
                {"r_max", p.grid.empty() ? 0.0 : p.grid.back()},
                {"residual_history", hist}};
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    if (path.has_parent_path()) {
        std::error_code ec;
        std::filesystem::create_directories(path.parent_path(), ec);
    }
    std::ofstream out(path, std::ios::binary);
    out << text;
    out.close();
    if (!out)
        throw Error(ErrorCode::Io, "cannot write " + path.string());
}

std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error(ErrorCode::Io, "cannot read " + path.string());
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

void write_json(const std::filesystem::path& path, const Json& j) {
    write_text(path, j.dump(2) + "\n");
}

std::string trial_batch_csv(const TrialBatch& batch) {
    std::string s = "trial_id,max_modulus\n";
    for (std::size_t i = 0; i < batch.values.size(); ++i)
        s += std::to_string(i) + ',' + format_real(batch.values[i]) + '\n';
    return s;
}

Json trial_batch_sidecar(const TrialBatch& batch) {
    return Json{{"params", to_json(batch.params)},
                {"base_seed", batch.base_seed},
                {"trials", batch.values.size()},
                {"version", library_version()}};
}

void write_trial_batch(const std::filesystem::path& stem, const TrialBatch& batch) {
    std::filesystem::path csv = stem;
    csv += ".csv";
    std::filesystem::path json = stem;
    json += ".json";
    write_text(csv, trial_batch_csv(batch));
    write_json(json, trial_batch_sidecar(batch));
}

TrialBatch read_trial_batch(const std::filesystem::path& stem) {
    std::filesystem::path csv = stem;
    csv += ".csv";
    std::filesystem::path json = stem;
    json += ".json";
    Json meta;
    try {
        meta = Json::parse(read_text(json));
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::Io, "malformed sidecar " + json.string() + ": " + e.what());
    }
    TrialBatch batch{params_from_json(meta.at("params")), meta.at("base_seed").get<std::uint64_t>(), {}};
    auto cols = read_csv_columns(csv);
    batch.values = cols.at("max_modulus");
    return batch;
}

std::string radial_samples_csv(const std::vector<RadialSample>& samples) {
    std::string s = "trial_id,particle_id,modulus\n";
    for (const RadialSample& r : samples)
        for (std::size_t k = 0; k < r.moduli().size(); ++k)
            s += std::to_string(r.trial_id()) + ',' + std::to_string(k) + ',' + format_real(r.moduli()[k]) + '\n';
    return s;
}

std::string configs_csv(const std::vector<ChainResult>& chains) {
    std::string s = "trial_id,particle_id,x,y\n";
    for (const ChainResult& c : chains)
        for (std::size_t t = 0; t < c.configs.size(); ++t) {
            const std::string id = std::to_string(c.samples[t].trial_id());
            for (std::size_t k = 0; k < c.configs[t].size(); ++k)
                s += id + ',' + std::to_string(k) + ',' + format_real(c.configs[t][k].x) + ',' +
                     format_real(c.configs[t][k].y) + '\n';
        }
    return s;
}

std::string profile_csv(const EquilibriumProfile& p) {
    std::string s = "r,phi\n";
    for (std::size_t i = 0; i < p.grid.size(); ++i) {
        const double phi = p.grid[i] > p.support_radius ? 0.0 : p.density[i];
        s += format_real(p.grid[i]) + ',' + format_real(phi) + '\n';
    }
    return s;
}

std::string law_csv(const std::vector<double>& t, const std::vector<double>& cdf) {
    std::string s = "t,cdf\n";
    for (std::size_t i = 0; i < t.size(); ++i)
        s += format_real(t[i]) + ',' + format_real(cdf[i]) + '\n';
    return s;
}

std::vector<double> parse_grid(const std::string& spec) {
    std::vector<std::string> parts;
    std::stringstream ss(spec);
    std::string item;
    while (std::getline(ss, item, ':'))
        parts.push_back(item);
    double start = 0.0, stop = 0.0, step = 0.0;
    if (parts.size() != 3 || !parse_double(parts[0], start) || !parse_double(parts[1], stop) ||
        !parse_double(parts[2], step))
        throw Error(ErrorCode::InvalidParams, "grid must read start:stop:step, got '" + spec + "'");
    if (!(step > 0.0) || !(stop >= start) || !std::isfinite(start) || !std::isfinite(stop))
        throw Error(ErrorCode::InvalidParams, "grid needs step > 0 and finite start <= stop, got '" + spec + "'");
    const double count = (stop - start) / step;
    if (count > 1e8)
        throw Error(ErrorCode::InvalidParams, "grid '" + spec + "' has too many points");
    const double nearest = std::round(count);
    const long last = std::abs(count - nearest) <= 1e-9 ? static_cast<long>(nearest)
                                                        : static_cast<long>(std::floor(count));
    std::vector<double> t;
    t.reserve(static_cast<std::size_t>(last + 1));
    for (long i = 0; i <= last; ++i)
        t.push_back(start + static_cast<double>(i) * step);
    return t;
}

std::vector<std::pair<std::string, std::string>> parse_flat_config(const std::string& text) {
    std::vector<std::pair<std::string, std::string>> out;
    std::istringstream in(text);
    std::string line;
    std::string section;
    int lineno = 0;
    auto fail = [&](const std::string& what) {
        throw Error(ErrorCode::InvalidParams, "config line " + std::to_string(lineno) + ": " + what);
    };
    while (std::getline(in, line)) {
        ++lineno;
        // strip comments outside quotes
        bool quoted = false;
        for (std::size_t i = 0; i < line.size(); ++i) {
            if (line[i] == '"')
                quoted = !quoted;
            else if (line[i] == '#' && !quoted) {
                line.resize(i);
                break;
            }
        }
        line = trim(line);
        if (line.empty())
            continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                fail("unterminated section header");
            section = trim(line.substr(1, line.size() - 2));
            if (section.empty())
                fail("empty section name");
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            fail("expected key = value");
        const std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (key.empty())
            fail("empty key");
        if (value.size() >= 2 && value.front() == '"' && value.back() == '"')
            value = value.substr(1, value.size() - 2);
        out.emplace_back(section.empty() ? key : section + "." + key, value);
    }
    return out;
}

std::map<std::string, std::vector<double>> read_csv_columns(const std::filesystem::path& path) {
    std::istringstream in(read_text(path));
    std::string line;
    if (!std::getline(in, line))
        throw Error(ErrorCode::Io, "empty CSV " + path.string());
    std::vector<std::string> names;
    {
        std::stringstream ss(line);
        std::string name;
        while (std::getline(ss, name, ','))
            names.push_back(trim(name));
    }
    std::map<std::string, std::vector<double>> cols;
    for (const auto& n : names)
        cols[n];
    int row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (trim(line).empty())
            continue;
        std::stringstream ss(line);
        std::string cell;
        std::size_t k = 0;
        while (std::getline(ss, cell, ',')) {
            double v = 0.0;
            if (k >= names.size() || !parse_double(cell, v))
                throw Error(ErrorCode::Io, path.string() + ": bad cell on row " + std::to_string(row));
            cols[names[k++]].push_back(v);
        }
        if (k != names.size())
            throw Error(ErrorCode::Io, path.string() + ": short row " + std::to_string(row));
    }
    return cols;
}

}  // namespace jellium
