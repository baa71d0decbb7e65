#include "deco/config.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>
#include <sstream>

#include "deco/io.hpp"

namespace deco::cfg {

namespace {

[[noreturn]] void bad(const std::string& key, const std::string& what) {
    throw ConfigError("config key '" + key + "': " + what);
}

void check_keys(const json& obj, const std::string& block, const std::set<std::string>& allowed) {
    if (!obj.is_object()) bad(block, "must be a table/object");
    for (auto it = obj.begin(); it != obj.end(); ++it)
        if (!allowed.count(it.key())) bad(block + "/" + it.key(), "unknown key");
}

double num_at(const json& obj, const std::string& key) {
    if (!obj.at(key).is_number()) bad(key, "must be a number");
    return obj.at(key).get<double>();
}

double num_or(const json& obj, const std::string& key, double dflt) {
    return obj.contains(key) ? num_at(obj, key) : dflt;
}

int int_at(const json& obj, const std::string& key) {
    if (!obj.at(key).is_number_integer()) bad(key, "must be an integer");
    return obj.at(key).get<int>();
}

std::vector<double> num_list(const json& v, const std::string& key, int expect = -1) {
    std::vector<double> out;
    if (v.is_number()) {
        if (expect < 0) bad(key, "expected an array");
        out.assign(static_cast<size_t>(expect), v.get<double>());
        return out;
    }
    if (!v.is_array()) bad(key, "must be a number or array of numbers");
    for (const auto& x : v) {
        if (!x.is_number()) bad(key, "array entries must be numbers");
        out.push_back(x.get<double>());
    }
    if (expect >= 0 && static_cast<int>(out.size()) != expect)
        bad(key, "expected " + std::to_string(expect) + " entries, got " + std::to_string(out.size()));
    return out;
}

// ------------------------------------------------------------------ TOML

struct TomlParser {
    json root = json::object();

    static std::string strip(const std::string& s) {
        size_t a = s.find_first_not_of(" \t\r");
        if (a == std::string::npos) return "";
        size_t b = s.find_last_not_of(" \t\r");
        return s.substr(a, b - a + 1);
    }

    static std::string drop_comment(const std::string& line) {
        bool in_str = false;
        for (size_t i = 0; i < line.size(); ++i) {
            if (line[i] == '"') in_str = !in_str;
            if (line[i] == '#' && !in_str) return line.substr(0, i);
        }
        return line;
    }

    json parse_value(const std::string& text, size_t& pos) const {
        while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
        if (pos >= text.size()) throw ConfigError("config: unexpected end of value");
        char c = text[pos];
        if (c == '[') {
            ++pos;
            json arr = json::array();
            while (true) {
                while (pos < text.size() && (std::isspace(static_cast<unsigned char>(text[pos])) || text[pos] == ','))
                    ++pos;
                if (pos >= text.size()) throw ConfigError("config: unterminated array");
                if (text[pos] == ']') {
                    ++pos;
                    return arr;
                }
                arr.push_back(parse_value(text, pos));
            }
        }
        if (c == '"') {
            size_t end = text.find('"', pos + 1);
            if (end == std::string::npos) throw ConfigError("config: unterminated string");
            json v = text.substr(pos + 1, end - pos - 1);
            pos = end + 1;
            return v;
        }
        size_t end = pos;
        while (end < text.size() && text[end] != ',' && text[end] != ']' &&
               !std::isspace(static_cast<unsigned char>(text[end])))
            ++end;
        std::string tok = text.substr(pos, end - pos);
        pos = end;
        if (tok == "true") return true;
        if (tok == "false") return false;
        try {
            if (tok.find_first_of(".eE") != std::string::npos) return std::stod(tok);
            return std::stoll(tok);
        } catch (...) {
            throw ConfigError("config: cannot parse value '" + tok + "'");
        }
    }

    void parse(const std::string& text) {
        std::istringstream in(text);
        std::string line, pending;
        json* table = &root;
        while (std::getline(in, line)) {
            line = strip(drop_comment(line));
            if (!pending.empty()) {
                pending += " " + line;
                if (std::count(pending.begin(), pending.end(), '[') >
                    std::count(pending.begin(), pending.end(), ']'))
                    continue;
                line = pending;
                pending.clear();
            }
            if (line.empty()) continue;
            if (line.front() == '[') {
                if (line.back() != ']') throw ConfigError("config: malformed table header " + line);
                std::string path = line.substr(1, line.size() - 2);
                table = &root;
                std::istringstream ps(path);
                std::string part;
                while (std::getline(ps, part, '.')) table = &(*table)[strip(part)];
                continue;
            }
            size_t eq = line.find('=');
            if (eq == std::string::npos) throw ConfigError("config: expected key = value, got '" + line + "'");
            if (std::count(line.begin(), line.end(), '[') > std::count(line.begin(), line.end(), ']')) {
                pending = line;
                continue;
            }
            std::string key = strip(line.substr(0, eq));
            std::string val = strip(line.substr(eq + 1));
            size_t pos = 0;
            (*table)[key] = parse_value(val, pos);
        }
        if (!pending.empty()) throw ConfigError("config: unterminated array near '" + pending + "'");
    }
};

// ------------------------------------------------------------- builders

bath::BathModel build_bath(const json& b, int nch) {
    if (!b.contains("model") || !b.at("model").is_string()) bad("bath/model", "required string");
    std::string model = b.at("model").get<std::string>();

    auto positions_from = [&](const json& blk, int count) {
        std::vector<Vector3d> pos;
        if (blk.contains("positions")) {
            const auto& arr = blk.at("positions");
            if (!arr.is_array() || static_cast<int>(arr.size()) != count)
                bad("bath/positions", "expected " + std::to_string(count) + " 3-vectors");
            for (const auto& p : arr) {
                auto v = num_list(p, "bath/positions", 3);
                pos.emplace_back(v[0], v[1], v[2]);
            }
        } else if (blk.contains("ring_radius")) {
            double r = num_at(blk, "ring_radius");
            for (int j = 1; j <= count; ++j)
                pos.emplace_back(r * std::cos(2.0 * pi * j / count), r * std::sin(2.0 * pi * j / count), 0.0);
        } else if (blk.contains("pair_distance")) {
            if (count != 2) bad("bath/pair_distance", "only valid for two systems");
            pos.emplace_back(0.0, 0.0, 0.0);
            pos.emplace_back(num_at(blk, "pair_distance"), 0.0, 0.0);
        } else {
            pos.assign(static_cast<size_t>(count), Vector3d::Zero());
        }
        return pos;
    };

    if (model == "gaussian_dipole") {
        check_keys(b, "bath",
                   {"model", "coupling_diag", "coupling_offdiag", "coupling_matrix", "dipole_angles_over_pi",
                    "correlation_time"});
        bath::GaussianDipoleBath g;
        g.correlation_time = num_or(b, "correlation_time", 1.0);
        auto eta = num_list(b.at("dipole_angles_over_pi"), "bath/dipole_angles_over_pi", nch);
        for (double& e : eta) e *= pi;
        g.dipole_angles = eta;
        if (b.contains("coupling_matrix")) {
            const auto& cm = b.at("coupling_matrix");
            if (!cm.is_array() || static_cast<int>(cm.size()) != nch) bad("bath/coupling_matrix", "square matrix");
            g.coupling.resize(nch, nch);
            for (int i = 0; i < nch; ++i) {
                auto row = num_list(cm.at(static_cast<size_t>(i)), "bath/coupling_matrix", nch);
                for (int j = 0; j < nch; ++j) g.coupling(i, j) = row[static_cast<size_t>(j)];
            }
        } else {
            double cd = num_or(b, "coupling_diag", 1.0);
            double co = num_or(b, "coupling_offdiag", 0.0);
            g.coupling = MatrixXd::Constant(nch, nch, co);
            g.coupling.diagonal().setConstant(cd);
        }
        return g;
    }
    if (model == "correlated_gaussian_decay") {
        check_keys(b, "bath",
                   {"model", "gamma", "r0", "correlation_times", "positions", "ring_radius", "pair_distance"});
        bath::CorrelatedGaussianDecayBath c;
        c.coupling_strength = num_at(b, "gamma");
        c.reference_distance = num_or(b, "r0", 1.0);
        c.correlation_times = num_list(b.at("correlation_times"), "bath/correlation_times", nch);
        c.positions = positions_from(b, nch);
        return c;
    }
    if (model == "exponential_dephasing") {
        check_keys(b, "bath", {"model", "gamma", "correlation_times", "positions", "ring_radius", "pair_distance"});
        bath::ExponentialDephasingBath e;
        e.coupling_strength = num_at(b, "gamma");
        e.correlation_times = num_list(b.at("correlation_times"), "bath/correlation_times", nch);
        e.positions = positions_from(b, nch);
        return e;
    }
    if (model == "tabulated") {
        check_keys(b, "bath", {"model", "grid", "values_re", "values_im"});
        bath::TabulatedBath t;
        t.grid = num_list(b.at("grid"), "bath/grid");
        const auto& re = b.at("values_re");
        if (!re.is_array() || re.size() != t.grid.size())
            bad("bath/values_re", "need one flattened channel matrix per grid point");
        for (size_t k = 0; k < t.grid.size(); ++k) {
            auto vr = num_list(re.at(k), "bath/values_re", nch * nch);
            std::vector<double> vi(static_cast<size_t>(nch) * nch, 0.0);
            if (b.contains("values_im")) vi = num_list(b.at("values_im").at(k), "bath/values_im", nch * nch);
            MatrixXcd m(nch, nch);
            for (int i = 0; i < nch; ++i)
                for (int j = 0; j < nch; ++j)
                    m(i, j) = cplx(vr[static_cast<size_t>(i * nch + j)], vi[static_cast<size_t>(i * nch + j)]);
            t.values.push_back(m);
        }
        return t;
    }
    bad("bath/model", "unknown model '" + model + "'");
}

mod::PiecewiseConstant piecewise_from(const json& blk, const std::string& key, const char* value_key) {
    check_keys(blk, key, {"edges", value_key});
    auto edges = num_list(blk.at("edges"), key + "/edges");
    auto vals = num_list(blk.at(value_key), key + "/" + value_key);
    return mod::PiecewiseConstant(edges, vals);
}

mod::ModulationSchedule build_modulation(const json& cfg, int nch) {
    if (!cfg.contains("modulation") || cfg.at("modulation").is_null())
        return mod::ModulationSchedule::uniform({}, nch);
    const json& m = cfg.at("modulation");
    check_keys(m, "modulation", {"global", "tau", "theta_over_pi", "stark", "drive"});

    bool has_train = m.contains("tau") || m.contains("theta_over_pi");
    std::vector<double> tau, theta;
    bool vector_valued = false;
    if (has_train) {
        if (!m.contains("tau")) bad("modulation/tau", "required with theta_over_pi");
        vector_valued = m.at("tau").is_array() || (m.contains("theta_over_pi") && m.at("theta_over_pi").is_array());
        tau = num_list(m.at("tau"), "modulation/tau", nch);
        theta = m.contains("theta_over_pi") ? num_list(m.at("theta_over_pi"), "modulation/theta_over_pi", nch)
                                            : std::vector<double>(static_cast<size_t>(nch), 0.0);
        for (double& th : theta) th *= pi;
    }
    std::vector<mod::ChannelModulation> chans(static_cast<size_t>(nch));
    for (int a = 0; a < nch; ++a) {
        if (has_train) chans[static_cast<size_t>(a)].train =
            mod::PhasePulseTrain{tau[static_cast<size_t>(a)], theta[static_cast<size_t>(a)]};
    }
    auto attach_pc = [&](const char* key, const char* value_key, auto setter) {
        if (!m.contains(key)) return;
        const json& blk = m.at(key);
        if (blk.is_array()) {
            vector_valued = true;
            if (static_cast<int>(blk.size()) != nch) bad(std::string("modulation/") + key, "one entry per channel");
            for (int a = 0; a < nch; ++a)
                setter(chans[static_cast<size_t>(a)],
                       piecewise_from(blk.at(static_cast<size_t>(a)), std::string("modulation/") + key, value_key));
        } else {
            auto pc = piecewise_from(blk, std::string("modulation/") + key, value_key);
            for (auto& ch : chans) setter(ch, pc);
        }
    };
    attach_pc("stark", "rates", [](mod::ChannelModulation& ch, mod::PiecewiseConstant pc) {
        ch.stark = mod::StarkShiftSchedule{std::move(pc)};
    });
    attach_pc("drive", "values", [](mod::ChannelModulation& ch, mod::PiecewiseConstant pc) {
        ch.drive = mod::DrivingEnvelope{std::move(pc)};
    });

    bool global = m.contains("global") ? m.at("global").get<bool>() : !vector_valued;
    if (global) {
        for (int a = 1; a < nch; ++a) {
            const auto& c0 = chans[0];
            const auto& ca = chans[static_cast<size_t>(a)];
            bool same_train = (!c0.train && !ca.train) ||
                              (c0.train && ca.train && c0.train->interval == ca.train->interval &&
                               c0.train->phase_step == ca.train->phase_step);
            if (!same_train) bad("modulation/global", "global schedule but channels differ");
        }
        return mod::ModulationSchedule::uniform(chans[0], nch);
    }
    return mod::ModulationSchedule::per_channel(chans);
}

struct SystemsSpec {
    ChannelLayout layout;
    std::vector<double> omega;
};

SystemsSpec build_systems(const json& cfg) {
    if (!cfg.contains("systems")) bad("systems", "block required");
    const json& s = cfg.at("systems");
    check_keys(s, "systems", {"count", "levels", "omega0", "omega1", "delta", "energies"});
    int count = int_at(s, "count");
    if (count < 1) bad("systems/count", "must be at least 1");
    std::vector<int> levels(static_cast<size_t>(count), 1);
    if (s.contains("levels")) {
        if (s.at("levels").is_number_integer()) {
            levels.assign(static_cast<size_t>(count), s.at("levels").get<int>());
        } else {
            auto lv = num_list(s.at("levels"), "systems/levels", count);
            for (int j = 0; j < count; ++j) levels[static_cast<size_t>(j)] = static_cast<int>(lv[static_cast<size_t>(j)]);
        }
    }
    SystemsSpec spec;
    spec.layout = ChannelLayout(levels);
    spec.omega.resize(static_cast<size_t>(spec.layout.size()));
    if (s.contains("energies")) {
        const auto& en = s.at("energies");
        if (!en.is_array() || static_cast<int>(en.size()) != count) bad("systems/energies", "one array per system");
        int idx = 0;
        for (int j = 0; j < count; ++j) {
            auto row = num_list(en.at(static_cast<size_t>(j)), "systems/energies", levels[static_cast<size_t>(j)]);
            for (double w : row) spec.omega[static_cast<size_t>(idx++)] = w;
        }
    } else if (s.contains("omega1") || s.contains("delta")) {
        double w1 = num_at(s, "omega1");
        double d = num_or(s, "delta", 0.0);
        int idx = 0;
        for (int j = 0; j < count; ++j)
            for (int n = 0; n < levels[static_cast<size_t>(j)]; ++n) spec.omega[static_cast<size_t>(idx++)] = w1 + n * d;
    } else {
        double w0 = num_or(s, "omega0", 0.0);
        std::fill(spec.omega.begin(), spec.omega.end(), w0);
    }
    return spec;
}

VectorXcd build_initial_decay(const json& cfg, const ChannelLayout& layout) {
    int nch = layout.size();
    if (!cfg.contains("initial_state")) {
        return VectorXcd::Constant(nch, cplx(1.0 / std::sqrt(static_cast<double>(nch)), 0.0));
    }
    const json& is = cfg.at("initial_state");
    check_keys(is, "initial_state",
               {"named", "l", "amplitudes_re", "amplitudes_im", "mixing", "mixing_im", "decay"});
    if (is.contains("named")) {
        std::string name = is.at("named").get<std::string>();
        int l = is.contains("l") ? int_at(is, "l") : 1;
        if (name == "uniform") return VectorXcd::Constant(nch, cplx(1.0 / std::sqrt(static_cast<double>(nch)), 0.0));
        if (name == "dicke") {
            if (layout.systems() != nch) bad("initial_state/named", "dicke needs two-level systems");
            if (l < 1 || l > nch) bad("initial_state/l", "Dicke index out of range");
            return decay::dicke_state(nch, l);
        }
        bad("initial_state/named", "unknown named state '" + name + "' for a decay run");
    }
    if (is.contains("mixing")) {
        auto cr = num_list(is.at("mixing"), "initial_state/mixing", nch);
        std::vector<double> ci(static_cast<size_t>(nch), 0.0);
        if (is.contains("mixing_im")) ci = num_list(is.at("mixing_im"), "initial_state/mixing_im", nch);
        cplx A = cplx(num_or(is, "decay", 1.0), 0.0);
        VectorXcd c(nch);
        for (int a = 0; a < nch; ++a) c(a) = cplx(cr[static_cast<size_t>(a)], ci[static_cast<size_t>(a)]);
        cplx aref = A / std::sqrt(c.squaredNorm());
        return aref * c;
    }
    auto re = num_list(is.at("amplitudes_re"), "initial_state/amplitudes_re", nch);
    std::vector<double> im(static_cast<size_t>(nch), 0.0);
    if (is.contains("amplitudes_im")) im = num_list(is.at("amplitudes_im"), "initial_state/amplitudes_im", nch);
    VectorXcd a(nch);
    for (int k = 0; k < nch; ++k) a(k) = cplx(re[static_cast<size_t>(k)], im[static_cast<size_t>(k)]);
    return a;
}

}  // namespace

json parse_config_text(const std::string& text) {
    size_t p = text.find_first_not_of(" \t\r\n");
    if (p != std::string::npos && text[p] == '{') {
        try {
            return json::parse(text);
        } catch (const std::exception& ex) {
            throw ConfigError(std::string("config: JSON parse error: ") + ex.what());
        }
    }
    TomlParser tp;
    tp.parse(text);
    return tp.root;
}

json load_config_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str());
}

ParsedConfig build_config(const json& config, std::optional<uint64_t> seed_override) {
    if (!config.is_object()) throw ConfigError("config: top level must be an object");
    check_keys(config, "config",
               {"mode", "bath", "systems", "modulation", "initial_state", "grid", "engine", "oracle", "optimize",
                "sweep", "output"});
    if (!config.contains("mode") || !config.at("mode").is_string()) bad("mode", "required string");

    ParsedConfig pc;
    pc.mode = config.at("mode").get<std::string>();
    const std::set<std::string> modes = {"decay", "dephasing", "optimize", "steer", "sweep", "oracle"};
    if (!modes.count(pc.mode)) bad("mode", "unknown mode '" + pc.mode + "'");
    json eff = config;

    // engine options (defaults echoed)
    EngineOptions eng;
    SignConvention sign = SignConvention::prose;
    {
        json e = config.contains("engine") ? config.at("engine") : json::object();
        check_keys(e, "engine", {"phase_convention", "memory_factor", "full_memory", "sign_convention"});
        std::string conv = e.contains("phase_convention") ? e.at("phase_convention").get<std::string>() : "printed";
        if (conv != "printed" && conv != "rotating") bad("engine/phase_convention", "printed or rotating");
        eng.phase_convention = conv == "printed" ? PhaseConvention::printed : PhaseConvention::rotating;
        eng.memory_factor = num_or(e, "memory_factor", 8.0);
        eng.full_memory = e.contains("full_memory") ? e.at("full_memory").get<bool>() : false;
        std::string sc = e.contains("sign_convention") ? e.at("sign_convention").get<std::string>() : "formula";
        if (sc != "prose" && sc != "formula") bad("engine/sign_convention", "prose or formula");
        sign = sc == "prose" ? SignConvention::prose : SignConvention::formula;
        eff["engine"] = {{"phase_convention", conv},
                         {"memory_factor", eng.memory_factor},
                         {"full_memory", eng.full_memory},
                         {"sign_convention", sc}};
    }

    SystemsSpec sys = build_systems(config);
    const int nch = sys.layout.size();
    if (!config.contains("bath")) bad("bath", "block required");
    bath::BathModel bath_model = build_bath(config.at("bath"), nch);
    mod::ModulationSchedule sched = build_modulation(config, nch);

    // grid with the default dt echoed back
    if (!config.contains("grid")) bad("grid", "block required");
    const json& g = config.at("grid");
    check_keys(g, "grid", {"t_end", "dt"});
    TimeGrid grid;
    grid.t_end = num_at(g, "t_end");
    double tau_min = sched.min_pulse_interval();
    double default_dt = std::min(std::isfinite(tau_min) ? tau_min : bath_model.min_time_scale(),
                                 bath_model.min_time_scale()) /
                        20.0;
    grid.dt = num_or(g, "dt", default_dt);
    eff["grid"] = {{"t_end", grid.t_end}, {"dt", grid.dt}};

    // oracle params (seed may be overridden by the environment)
    {
        json o = config.contains("oracle") ? config.at("oracle") : json::object();
        check_keys(o, "oracle", {"realizations", "seed", "times"});
        pc.oracle.realizations = o.contains("realizations") ? int_at(o, "realizations") : 2000;
        if (o.contains("seed")) pc.oracle.seed = o.at("seed").get<uint64_t>();
        if (o.contains("times")) pc.oracle.times = num_list(o.at("times"), "oracle/times");
        if (seed_override) pc.oracle.seed = *seed_override;
        eff["oracle"] = {{"realizations", pc.oracle.realizations},
                         {"seed", pc.oracle.seed},
                         {"times", pc.oracle.times}};
    }
    pc.seed = pc.oracle.seed;

    {
        json o = config.contains("output") ? config.at("output") : json::object();
        check_keys(o, "output", {"dir", "prefix", "stride"});
        pc.output.dir = o.contains("dir") ? o.at("dir").get<std::string>() : "out";
        pc.output.prefix = o.contains("prefix") ? o.at("prefix").get<std::string>() : pc.mode;
        pc.output.stride = o.contains("stride") ? int_at(o, "stride") : 1;
        if (pc.output.stride < 1) bad("output/stride", "must be at least 1");
        eff["output"] = {{"dir", pc.output.dir}, {"prefix", pc.output.prefix}, {"stride", pc.output.stride}};
    }

    const bool dephasing_like = bath_model.get_if<bath::ExponentialDephasingBath>() != nullptr ||
                                (pc.mode == "dephasing");
    if (dephasing_like) {
        DephasingScenario s;
        s.qubits = sys.layout.systems();
        s.bath = bath_model;
        s.modulation = sched;
        s.grid = grid;
        s.sign_convention = sign;
        if (config.contains("initial_state")) {
            const json& is = config.at("initial_state");
            check_keys(is, "initial_state", {"named", "l"});
            std::string name = is.contains("named") ? is.at("named").get<std::string>() : "basis";
            int l = is.contains("l") ? int_at(is, "l") : 1;
            if (name == "basis")
                s.initial = {DephasingInitial::Kind::basis, l};
            else if (name == "bell")
                s.initial = {DephasingInitial::Kind::bell, l};
            else
                bad("initial_state/named", "dephasing runs take 'basis' or 'bell'");
        }
        s.validate();
        pc.dephasing = std::move(s);
    } else {
        DecayScenario s;
        s.layout = sys.layout;
        s.omega = sys.omega;
        s.bath = bath_model;
        s.modulation = sched;
        s.grid = grid;
        s.options = eng;
        s.initial = build_initial_decay(config, sys.layout);
        s.validate();
        pc.decay = std::move(s);
    }

    if (pc.mode == "optimize" || pc.mode == "steer") {
        json o = config.contains("optimize") ? config.at("optimize") : json::object();
        check_keys(o, "optimize",
                   {"objective", "channels", "parameter", "bounds_over_pi", "desired_mixing", "desired_mixing_im",
                    "target_time", "penalty", "weights", "restarts", "max_iterations", "t_eval", "bell_pair"});
        opt::OptimizationProblem prob;
        std::string objective = pc.mode == "steer" ? "steer"
                                : o.contains("objective") ? o.at("objective").get<std::string>() : "preserve";
        if (objective == "preserve")
            prob.objective = opt::ObjectiveKind::preserve;
        else if (objective == "steer")
            prob.objective = opt::ObjectiveKind::steer;
        else if (objective == "equalize_bell")
            prob.objective = opt::ObjectiveKind::equalize_bell;
        else
            bad("optimize/objective", "preserve, steer or equalize_bell");
        prob.decay = pc.decay;
        prob.dephasing = pc.dephasing;
        std::vector<double> chans;
        if (o.contains("channels"))
            chans = num_list(o.at("channels"), "optimize/channels");
        else
            for (int a = 1; a <= nch; ++a) chans.push_back(a);
        std::string param = o.contains("parameter") ? o.at("parameter").get<std::string>() : "theta";
        if (param != "theta" && param != "tau") bad("optimize/parameter", "theta or tau");
        for (double c : chans) {
            int a = static_cast<int>(c);
            if (a < 1 || a > nch) bad("optimize/channels", "channel index out of range");
            prob.free.push_back({a - 1, param == "theta" ? opt::FreeParameter::Kind::theta
                                                         : opt::FreeParameter::Kind::tau});
        }
        std::vector<double> bounds = o.contains("bounds_over_pi")
                                         ? num_list(o.at("bounds_over_pi"), "optimize/bounds_over_pi", 2)
                                         : std::vector<double>{0.05, 1.95};
        prob.bounds.assign(prob.free.size(), {bounds[0] * pi, bounds[1] * pi});
        if (param == "tau") prob.bounds.assign(prob.free.size(), {bounds[0], bounds[1]});
        if (o.contains("desired_mixing")) {
            auto dr = num_list(o.at("desired_mixing"), "optimize/desired_mixing", nch);
            std::vector<double> di(static_cast<size_t>(nch), 0.0);
            if (o.contains("desired_mixing_im"))
                di = num_list(o.at("desired_mixing_im"), "optimize/desired_mixing_im", nch);
            prob.desired_mixing.resize(nch);
            for (int a = 0; a < nch; ++a)
                prob.desired_mixing(a) = cplx(dr[static_cast<size_t>(a)], di[static_cast<size_t>(a)]);
        } else if (prob.objective == opt::ObjectiveKind::steer) {
            prob.desired_mixing = VectorXcd::Constant(nch, cplx(1.0, 0.0));
        }
        prob.target_time = num_or(o, "target_time", 0.0);
        prob.fidelity_penalty = num_or(o, "penalty", 0.1);
        if (o.contains("weights")) {
            auto w = num_list(o.at("weights"), "optimize/weights", 3);
            prob.weights = {w[0], w[1], w[2]};
        }
        prob.restarts = o.contains("restarts") ? int_at(o, "restarts") : 8;
        prob.max_iterations = o.contains("max_iterations") ? int_at(o, "max_iterations") : 400;
        prob.evaluation_time = num_or(o, "t_eval", 0.0);
        if (o.contains("bell_pair")) {
            auto bp = num_list(o.at("bell_pair"), "optimize/bell_pair", 2);
            prob.bell_a = static_cast<int>(bp[0]);
            prob.bell_b = static_cast<int>(bp[1]);
        }
        prob.validate();
        pc.problem = std::move(prob);
        eff["optimize"] = {{"objective", objective},
                           {"parameter", param},
                           {"restarts", pc.problem->restarts},
                           {"max_iterations", pc.problem->max_iterations},
                           {"bounds_over_pi", bounds}};
    }

    if (pc.mode == "sweep") {
        if (!pc.decay) bad("mode", "sweep needs a decay scenario");
        json o = config.contains("sweep") ? config.at("sweep") : json::object();
        check_keys(o, "sweep",
                   {"powers_over_pi", "min_over_pi", "max_over_pi", "count", "t_eval", "t_objective", "restarts",
                    "max_iterations"});
        if (o.contains("powers_over_pi")) {
            pc.sweep_powers = num_list(o.at("powers_over_pi"), "sweep/powers_over_pi");
        } else {
            double lo = num_or(o, "min_over_pi", 0.5), hi = num_or(o, "max_over_pi", 4.0);
            int count = o.contains("count") ? int_at(o, "count") : 10;
            if (count < 2) bad("sweep/count", "must be at least 2");
            for (int i = 0; i < count; ++i)
                pc.sweep_powers.push_back(lo + (hi - lo) * i / static_cast<double>(count - 1));
        }
        for (double& p : pc.sweep_powers) p *= pi;
        pc.sweep_options.t_eval = num_or(o, "t_eval", 50.0);
        pc.sweep_options.t_objective = num_or(o, "t_objective", 30.0);
        pc.sweep_options.restarts = o.contains("restarts") ? int_at(o, "restarts") : 2;
        pc.sweep_options.max_iterations = o.contains("max_iterations") ? int_at(o, "max_iterations") : 60;
    }

    pc.effective = std::move(eff);
    pc.config_hash = io::fnv1a64_hex(pc.effective.dump());
    return pc;
}

}  // namespace deco::cfg
