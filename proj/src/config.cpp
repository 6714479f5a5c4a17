#include "fpa/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace fpa {

namespace {

using json = nlohmann::ordered_json;

void reject_unknown(const json& obj, const std::string& section, std::set<std::string> allowed) {
    for (const auto& [key, _] : obj.items()) {
        if (!allowed.count(key)) {
            throw std::invalid_argument("config: unknown key \"" +
                                        (section.empty() ? key : section + "." + key) + "\"");
        }
    }
}

template <typename T>
void get_to(const json& obj, const std::string& section, const char* key, T& out) {
    if (!obj.contains(key)) return;
    try {
        obj.at(key).get_to(out);
    } catch (const json::exception&) {
        throw std::invalid_argument("config: bad value for \"" + section + "." + key + "\"");
    }
}

}  // namespace

void RunConfig::validate() const {
    Grid g{grid.Nx, grid.Nv, grid.L, grid.Vmax > 0.0 ? grid.Vmax : 1.0};
    g.validate();
    force.validate();
    if (averaging.variant != "cs" && averaging.variant != "double_conv" &&
        averaging.variant != "identity") {
        throw std::invalid_argument("config: averaging.variant must be cs | double_conv | identity");
    }
    if (averaging.kernel != "global" && averaging.kernel != "tent") {
        throw std::invalid_argument("config: averaging.kernel must be global | tent");
    }
    if (averaging.kernel == "tent" && !(averaging.r0 > 0.0 && averaging.r0 <= 0.5 * grid.L)) {
        throw std::invalid_argument("config: averaging.r0 must be in (0, L/2] for the tent kernel");
    }
    if (!(solver.dt > 0.0)) throw std::invalid_argument("config: solver.dt must be > 0");
    if (!(solver.T >= 0.0)) throw std::invalid_argument("config: solver.T must be >= 0");
    if (solver.record_every < 0) throw std::invalid_argument("config: solver.record_every must be >= 0");
    if (solver.snapshot_every < 0) {
        throw std::invalid_argument("config: solver.snapshot_every must be >= 0");
    }
    if (particles.N < 1) throw std::invalid_argument("config: particles.N must be >= 1");
    if (!(particles.dt > 0.0)) throw std::invalid_argument("config: particles.dt must be > 0");
    if (!(diagnostics.epsilon_tilde > 0.0)) {
        throw std::invalid_argument("config: diagnostics.epsilon_tilde must be > 0");
    }
    if (diagnostics.gap_subspace != "full" && diagnostics.gap_subspace != "mean_zero") {
        throw std::invalid_argument("config: diagnostics.gap_subspace must be full | mean_zero");
    }
    gamma_fixed();  // validates gamma_mode
    if (io.preset != "equilibrium" && io.preset != "shifted_maxwellian" && io.preset != "two_bump" &&
        io.preset != "from_file") {
        throw std::invalid_argument(
            "config: io.preset must be equilibrium | shifted_maxwellian | two_bump | from_file");
    }
    if (!(io.preset_T > 0.0)) throw std::invalid_argument("config: io.preset_T must be > 0");
    if (io.preset == "from_file" && io.input_state.empty() && io.input_ensemble.empty()) {
        throw std::invalid_argument("config: io.preset=from_file needs io.input_state or io.input_ensemble");
    }
}

Grid RunConfig::make_grid() const {
    Grid g{grid.Nx, grid.Nv, grid.L, grid.Vmax};
    if (g.Vmax <= 0.0) g.Vmax = auto_vmax(force);
    g.validate();
    return g;
}

AveragingModel RunConfig::make_model(int Nx) const {
    AveragingModel m;
    m.variant = averaging.variant == "cs"
                    ? AveragingVariant::cs
                    : (averaging.variant == "double_conv" ? AveragingVariant::double_conv
                                                          : AveragingVariant::identity);
    m.kernel = make_kernel(averaging.kernel == "global" ? KernelShape::global : KernelShape::tent,
                           averaging.r0, Nx, grid.L);
    return m;
}

InitSpec RunConfig::make_init_spec() const {
    InitSpec spec;
    spec.preset = io.preset == "equilibrium"
                      ? Preset::equilibrium
                      : (io.preset == "shifted_maxwellian"
                             ? Preset::shifted_maxwellian
                             : (io.preset == "two_bump" ? Preset::two_bump : Preset::from_file));
    spec.a = io.preset_a;
    spec.T = io.preset_T;
    spec.file = io.input_state;
    return spec;
}

GapSubspace RunConfig::gap_subspace_enum() const {
    return diagnostics.gap_subspace == "full" ? GapSubspace::full : GapSubspace::mean_zero;
}

double RunConfig::gamma_fixed() const {
    if (diagnostics.gamma_mode == "auto") return -1.0;
    try {
        std::size_t pos = 0;
        const double g = std::stod(diagnostics.gamma_mode, &pos);
        if (pos != diagnostics.gamma_mode.size() || !(g >= 0.0)) throw std::invalid_argument("");
        return g;
    } catch (...) {
        throw std::invalid_argument(
            "config: diagnostics.gamma_mode must be \"auto\" or a nonnegative number");
    }
}

RunConfig parse_config(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("config: JSON parse error: ") + e.what());
    }
    if (!j.is_object()) throw std::invalid_argument("config: top level must be an object");
    reject_unknown(j, "", {"grid", "force", "averaging", "solver", "particles", "diagnostics", "io"});
    RunConfig c;
    if (j.contains("grid")) {
        const auto& s = j["grid"];
        reject_unknown(s, "grid", {"Nx", "Nv", "L", "Vmax"});
        get_to(s, "grid", "Nx", c.grid.Nx);
        get_to(s, "grid", "Nv", c.grid.Nv);
        get_to(s, "grid", "L", c.grid.L);
        get_to(s, "grid", "Vmax", c.grid.Vmax);
    }
    if (j.contains("force")) {
        const auto& s = j["force"];
        reject_unknown(s, "force", {"sigma", "p", "q", "R", "w"});
        get_to(s, "force", "sigma", c.force.sigma);
        get_to(s, "force", "p", c.force.p);
        get_to(s, "force", "q", c.force.q);
        get_to(s, "force", "R", c.force.R);
        get_to(s, "force", "w", c.force.w);
    }
    if (j.contains("averaging")) {
        const auto& s = j["averaging"];
        reject_unknown(s, "averaging", {"variant", "kernel", "r0"});
        get_to(s, "averaging", "variant", c.averaging.variant);
        get_to(s, "averaging", "kernel", c.averaging.kernel);
        get_to(s, "averaging", "r0", c.averaging.r0);
    }
    if (j.contains("solver")) {
        const auto& s = j["solver"];
        reject_unknown(s, "solver", {"dt", "T", "snapshot_every", "record_every", "cfl_guard"});
        get_to(s, "solver", "dt", c.solver.dt);
        get_to(s, "solver", "T", c.solver.T);
        get_to(s, "solver", "snapshot_every", c.solver.snapshot_every);
        get_to(s, "solver", "record_every", c.solver.record_every);
        get_to(s, "solver", "cfl_guard", c.solver.cfl_guard);
    }
    if (j.contains("particles")) {
        const auto& s = j["particles"];
        reject_unknown(s, "particles", {"N", "dt", "noise_on", "seed"});
        get_to(s, "particles", "N", c.particles.N);
        get_to(s, "particles", "dt", c.particles.dt);
        get_to(s, "particles", "noise_on", c.particles.noise_on);
        get_to(s, "particles", "seed", c.particles.seed);
    }
    if (j.contains("diagnostics")) {
        const auto& s = j["diagnostics"];
        reject_unknown(s, "diagnostics",
                       {"epsilon_tilde", "gamma_mode", "gap_subspace", "hard_gate_assumptions"});
        get_to(s, "diagnostics", "epsilon_tilde", c.diagnostics.epsilon_tilde);
        if (s.contains("gamma_mode")) {
            if (s["gamma_mode"].is_number()) {
                c.diagnostics.gamma_mode = s["gamma_mode"].dump();
            } else {
                get_to(s, "diagnostics", "gamma_mode", c.diagnostics.gamma_mode);
            }
        }
        get_to(s, "diagnostics", "gap_subspace", c.diagnostics.gap_subspace);
        get_to(s, "diagnostics", "hard_gate_assumptions", c.diagnostics.hard_gate_assumptions);
    }
    if (j.contains("io")) {
        const auto& s = j["io"];
        reject_unknown(s, "io",
                       {"out_dir", "preset", "preset_a", "preset_T", "input_state", "input_ensemble"});
        get_to(s, "io", "out_dir", c.io.out_dir);
        get_to(s, "io", "preset", c.io.preset);
        get_to(s, "io", "preset_a", c.io.preset_a);
        get_to(s, "io", "preset_T", c.io.preset_T);
        get_to(s, "io", "input_state", c.io.input_state);
        get_to(s, "io", "input_ensemble", c.io.input_ensemble);
    }
    c.validate();
    return c;
}

std::string serialize_config(const RunConfig& c) {
    json j;
    j["grid"] = {{"Nx", c.grid.Nx}, {"Nv", c.grid.Nv}, {"L", c.grid.L}, {"Vmax", c.grid.Vmax}};
    j["force"] = {{"sigma", c.force.sigma},
                  {"p", c.force.p},
                  {"q", c.force.q},
                  {"R", c.force.R},
                  {"w", c.force.w}};
    j["averaging"] = {{"variant", c.averaging.variant},
                      {"kernel", c.averaging.kernel},
                      {"r0", c.averaging.r0}};
    j["solver"] = {{"dt", c.solver.dt},
                   {"T", c.solver.T},
                   {"snapshot_every", c.solver.snapshot_every},
                   {"record_every", c.solver.record_every},
                   {"cfl_guard", c.solver.cfl_guard}};
    j["particles"] = {{"N", c.particles.N},
                      {"dt", c.particles.dt},
                      {"noise_on", c.particles.noise_on},
                      {"seed", c.particles.seed}};
    j["diagnostics"] = {{"epsilon_tilde", c.diagnostics.epsilon_tilde},
                        {"gamma_mode", c.diagnostics.gamma_mode},
                        {"gap_subspace", c.diagnostics.gap_subspace},
                        {"hard_gate_assumptions", c.diagnostics.hard_gate_assumptions}};
    j["io"] = {{"out_dir", c.io.out_dir},       {"preset", c.io.preset},
               {"preset_a", c.io.preset_a},     {"preset_T", c.io.preset_T},
               {"input_state", c.io.input_state}, {"input_ensemble", c.io.input_ensemble}};
    return j.dump(2) + "\n";
}

RunConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("config: cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

}  // namespace fpa
