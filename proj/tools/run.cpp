#include "run.hpp"

#include "oqs/gaussian.hpp"
#include "oqs/liouville.hpp"
#include "oqs/nlce.hpp"
#include "oqs/semiclassics.hpp"
#include "oqs/trajectories.hpp"

#include <openssl/evp.h>
#include <unistd.h>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>

#ifndef OQS_VERSION
#define OQS_VERSION "0.0.0"
#endif

namespace oqs::cli {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr int kSchemaVersion = 1;

const std::set<std::string> kCommands = {"steady", "spectrum", "evolve", "traj",
                                         "scan",   "gaussian", "semiclassical", "nlce"};
const std::set<std::string> kStochastic = {"traj"};

void only_keys(const json& j, const std::string& where, const std::set<std::string>& allowed) {
  if (!j.is_object()) throw InputError(where + ": expected an object");
  for (const auto& [k, v] : j.items())
    if (!allowed.count(k)) throw InputError(where + ": unknown key '" + k + "'");
}

const json& need(const json& j, const std::string& key, const std::string& where) {
  if (!j.contains(key)) throw InputError(where + ": missing '" + key + "'");
  return j.at(key);
}

double positive(const json& j, const std::string& key, const std::string& where) {
  const double v = need(j, key, where).get<double>();
  if (!(v > 0)) throw InputError(where + "." + key + " must be positive");
  return v;
}

// {"values": [...]} | {"from", "to", "num", "log"?} | plain array
std::vector<double> grid(const json& g, const std::string& where) {
  if (g.is_array()) return g.get<std::vector<double>>();
  if (g.contains("values")) {
    only_keys(g, where, {"param", "values"});
    return g.at("values").get<std::vector<double>>();
  }
  only_keys(g, where, {"param", "from", "to", "num", "log"});
  const double a = need(g, "from", where).get<double>(), b = need(g, "to", where).get<double>();
  const int n = need(g, "num", where).get<int>();
  if (n < 1) throw InputError(where + ".num must be >= 1");
  if (g.value("log", false)) {
    if (!(a > 0 && b > 0)) throw InputError(where + ": log grid needs positive bounds");
    return logspace(a, b, n);
  }
  return n == 1 ? std::vector<double>{a} : linspace(a, b, n);
}

std::vector<double> time_grid(const json& cfg) {
  std::vector<double> t = grid(need(cfg, "times", "config"), "times");
  if (t.empty()) throw InputError("times: empty grid");
  for (size_t i = 1; i < t.size(); ++i)
    if (!(t[i] > t[i - 1])) throw InputError("times: grid must be strictly increasing");
  return t;
}

// ---- model ----

ModelSpec model_of(const json& cfg, const std::optional<std::pair<std::string, double>>& set = std::nullopt) {
  const json& m = need(cfg, "model", "config");
  if (m.contains("inline")) return model_from_json(m.at("inline").dump());
  Params p = m.at("params").get<Params>();
  if (set) p[set->first] = set->second;
  return build_model(m.at("name").get<std::string>(), p);
}

// "n" sums over sites, "n@2" is site 2 only.
Operator observable(const ModelSpec& m, const std::string& spec) {
  const auto at = spec.find('@');
  const std::string name = spec.substr(0, at);
  if (at != std::string::npos) {
    int site = 0;
    try {
      site = std::stoi(spec.substr(at + 1));
    } catch (const std::exception&) {
      throw InputError("observable '" + spec + "': bad site index");
    }
    if (site < 0 || site >= static_cast<int>(m.basis.size()))
      throw InputError("observable '" + spec + "': site out of range");
    return embed(local_operator(m.basis[site], name), site, m.basis);
  }
  Operator o = identity(m.basis);
  o.matrix.setZero();
  for (int i = 0; i < static_cast<int>(m.basis.size()); ++i) o = o + embed(local_operator(m.basis[i], name), i, m.basis);
  return o;
}

std::vector<Operator> observables(const ModelSpec& m, const json& cfg) {
  std::vector<Operator> out;
  for (const auto& s : cfg.at("observables")) out.push_back(observable(m, s.get<std::string>()));
  return out;
}

std::vector<std::string> observable_names(const json& cfg) {
  std::vector<std::string> out;
  for (const auto& s : cfg.at("observables")) out.push_back(s.get<std::string>());
  return out;
}

// {"level": k} on every site, or {"levels": [k0, k1, ...]}
Vec initial_state(const ModelSpec& m, const json& cfg) {
  const json& ini = need(cfg, "initial", "config");
  only_keys(ini, "initial", {"level", "levels"});
  const int n = static_cast<int>(m.basis.size());
  std::vector<int> lv;
  if (ini.contains("levels")) {
    lv = ini.at("levels").get<std::vector<int>>();
    if (static_cast<int>(lv.size()) != n) throw InputError("initial.levels: need one level per site");
  } else {
    lv.assign(n, need(ini, "level", "initial").get<int>());
  }
  std::vector<Vec> local;
  for (int i = 0; i < n; ++i) {
    if (lv[i] < 0 || lv[i] >= m.basis[i].dim) throw InputError("initial: level out of range");
    local.push_back(basis_vector(m.basis[i].dim, lv[i]));
  }
  return product_state(local);
}

double expect(const Operator& o, const Operator& rho) { return (o.matrix * rho.matrix).trace().real(); }

std::optional<std::pair<std::string, std::vector<double>>> sweep_of(const json& cfg) {
  if (!cfg.contains("sweep")) return std::nullopt;
  const json& s = cfg.at("sweep");
  return std::make_pair(need(s, "param", "sweep").get<std::string>(), grid(s, "sweep"));
}

// ---- commands ----

Table cmd_steady(const json& cfg) {
  const auto sw = sweep_of(cfg);
  const bool with_adr = cfg.value("steady", json::object()).value("adr", true);
  Table t;
  if (sw) t.header.push_back(sw->first);
  for (const auto& n : observable_names(cfg)) t.header.push_back(n);
  if (with_adr) t.header.push_back("adr");
  const std::vector<double> values = sw ? sw->second : std::vector<double>{NAN};
  for (double v : values) {
    ModelSpec m = sw ? model_of(cfg, std::make_pair(sw->first, v)) : model_of(cfg);
    SuperOperator l = vectorize(m);
    SteadyState ss = steady_state(l);
    std::vector<double> row;
    if (sw) row.push_back(v);
    for (const auto& o : observables(m, cfg)) row.push_back(expect(o, ss.rho));
    if (with_adr) row.push_back(adr(spectrum(l, false)));
    t.rows.push_back(row);
  }
  return t;
}

Table cmd_spectrum(const json& cfg) {
  const auto sw = sweep_of(cfg);
  const int n_modes = cfg.value("spectrum", json::object()).value("n_modes", -1);
  Table t;
  if (sw) t.header.push_back(sw->first);
  t.header.insert(t.header.end(), {"index", "re", "im"});
  const std::vector<double> values = sw ? sw->second : std::vector<double>{NAN};
  for (double v : values) {
    ModelSpec m = sw ? model_of(cfg, std::make_pair(sw->first, v)) : model_of(cfg);
    SpectralData s = spectrum(vectorize(m), false);
    const int k = n_modes < 0 ? s.size() : std::min(n_modes, s.size());
    for (int i = 0; i < k; ++i) {
      std::vector<double> row;
      if (sw) row.push_back(v);
      row.insert(row.end(), {double(i), s.values[i].real(), s.values[i].imag()});
      t.rows.push_back(row);
    }
  }
  return t;
}

Table cmd_evolve(const json& cfg) {
  ModelSpec m = model_of(cfg);
  const auto tg = time_grid(cfg);
  Operator rho0 = projector(initial_state(m, cfg), m.basis);
  EvolveResult r = evolve(vectorize(m), rho0, tg);
  const auto obs = observables(m, cfg);
  Table t;
  t.header.push_back("t");
  for (const auto& n : observable_names(cfg)) t.header.push_back(n);
  for (size_t i = 0; i < tg.size(); ++i) {
    std::vector<double> row{tg[i]};
    for (const auto& o : obs) row.push_back(expect(o, r.states[i]));
    t.rows.push_back(row);
  }
  return t;
}

Table cmd_traj(const json& cfg) {
  const json& tj = cfg.at("traj");
  ModelSpec m = model_of(cfg);
  EnsembleOptions opt;
  opt.method = unravelling_from_string(tj.at("method").get<std::string>());
  opt.n_traj = tj.at("n_traj").get<long>();
  opt.seed = cfg.at("seed").get<unsigned long long>();
  opt.threads = cfg.at("threads").get<int>();
  opt.keep_rho = false;
  opt.traj.dt = tj.at("dt").get<double>();
  opt.traj.keep_states = false;
  EnsembleResult r = run_ensemble(m, initial_state(m, cfg), time_grid(cfg), observables(m, cfg), opt);
  Table t;
  t.header.push_back("t");
  const auto names = observable_names(cfg);
  for (const auto& n : names) t.header.insert(t.header.end(), {n, n + "_sem"});
  for (size_t i = 0; i < r.times.size(); ++i) {
    std::vector<double> row{r.times[i]};
    for (size_t k = 0; k < names.size(); ++k) row.insert(row.end(), {r.mean[k][i], r.sem[k][i]});
    t.rows.push_back(row);
  }
  return t;
}

// Uniform mean-field XYZ scan over J_y: long-time |<sx>| from a slightly tilted down state and the
// stability exponent of the down state.
Table cmd_scan(const json& cfg) {
  const json& sc = cfg.at("scan");
  XyzMeanField p;
  p.jx = sc.at("Jx").get<double>();
  p.jz = sc.at("Jz").get<double>();
  p.gamma = sc.at("gamma").get<double>();
  p.z = sc.at("z").get<double>();
  const double t_max = sc.at("t_max").get<double>();
  const auto jy = grid(need(cfg, "sweep", "config"), "sweep");
  RVec s0(3);
  s0 << 0.01, 0.01, -std::sqrt(1 - 2e-4);
  Table t{{"Jy", "abs_sx", "stability"}, {}};
  for (double v : jy) {
    p.jy = v;
    auto traj = xyz_meanfield(p, s0, {0.0, t_max});
    t.rows.push_back({v, std::abs(traj.back()[0]), xyz_stability(p)});
  }
  return t;
}

Table cmd_gaussian(const json& cfg) {
  const json& g = cfg.at("gaussian");
  const std::string problem = g.at("problem").get<std::string>();
  Table t;
  if (problem == "third_quantization") {
    only_keys(g, "gaussian", {"problem", "omega_c", "kappa_minus", "kappa_plus", "n_levels"});
    auto s = third_quantization_spectrum(g.at("omega_c").get<double>(), g.at("kappa_minus").get<double>(),
                                         g.at("kappa_plus").get<double>(), g.at("n_levels").get<int>());
    t.header = {"mu", "nu", "re", "im"};
    for (const auto& md : s.modes) t.rows.push_back({double(md.mu), double(md.nu), md.liouvillian.real(), md.liouvillian.imag()});
  } else if (problem == "kitaev") {
    only_keys(g, "gaussian", {"problem", "n_sites", "gamma"});
    auto d = majorana_dark_modes(g.at("n_sites").get<int>(), g.at("gamma").get<double>());
    t.header = {"index", "rate", "dark"};
    std::set<int> dark(d.dark.begin(), d.dark.end());
    for (int i = 0; i < d.rates.size(); ++i) t.rows.push_back({double(i), d.rates[i], dark.count(i) ? 1.0 : 0.0});
  } else {
    throw InputError("gaussian.problem: unknown '" + problem + "' (third_quantization, kitaev)");
  }
  return t;
}

Table cmd_semiclassical(const json& cfg) {
  const json& s = cfg.at("semiclassical");
  const std::string problem = s.at("problem").get<std::string>();
  Table t;
  if (problem == "btc") {
    only_keys(s, "semiclassical", {"problem", "omega0", "kappa", "S", "s0"});
    const double w = s.at("omega0").get<double>(), k = s.at("kappa").get<double>(), S = s.at("S").get<double>();
    const auto v = s.at("s0").get<std::vector<double>>();
    if (v.size() != 3) throw InputError("semiclassical.s0: need three components");
    RVec s0 = Eigen::Map<const RVec>(v.data(), 3);
    const auto tg = time_grid(cfg);
    auto traj = btc_dynamics(w, k, S, s0, tg);
    t.header = {"t", "Sx", "Sy", "Sz", "M"};
    for (size_t i = 0; i < tg.size(); ++i)
      t.rows.push_back({tg[i], traj[i][0], traj[i][1], traj[i][2], btc_invariant(w, k, S, traj[i])});
  } else if (problem == "weak_loss" || problem == "strong_loss") {
    only_keys(s, "semiclassical", {"problem", "L", "n0", "rate"});
    const int l = s.at("L").get<int>();
    if (l < 1) throw InputError("semiclassical.L must be >= 1");
    RVec nk0 = RVec::Constant(l, s.at("n0").get<double>());
    const double rate = s.at("rate").get<double>();
    const auto tg = time_grid(cfg);
    MomentumSeries r = problem == "weak_loss" ? weak_loss_evolve(nk0, rate, tg) : strong_loss_evolve(nk0, rate, tg);
    t.header = {"t", "density"};
    for (size_t i = 0; i < r.t.size(); ++i) t.rows.push_back({r.t[i], r.density[i]});
  } else if (problem == "twosite") {
    only_keys(s, "semiclassical", {"problem", "N"});
    auto r = twosite_dephasing(s.at("N").get<int>(), time_grid(cfg));
    t.header = {"tau", "peak", "coherence", "norm"};
    for (size_t i = 0; i < r.tau.size(); ++i) t.rows.push_back({r.tau[i], r.p[i].maxCoeff(), r.coherence[i], r.norm[i]});
  } else if (problem == "bogoliubov") {
    only_keys(s, "semiclassical", {"problem", "mu", "mass", "kappa", "k"});
    const auto k = grid(s.at("k"), "semiclassical.k");
    auto [a, b] = bogoliubov_dispersion(s.at("mu").get<double>(), s.at("mass").get<double>(),
                                        s.at("kappa").get<double>(), k);
    t.header = {"k", "re_plus", "im_plus", "re_minus", "im_minus"};
    for (size_t i = 0; i < k.size(); ++i) t.rows.push_back({k[i], a[i].real(), a[i].imag(), b[i].real(), b[i].imag()});
  } else {
    throw InputError("semiclassical.problem: unknown '" + problem + "' (btc, weak_loss, strong_loss, twosite, bogoliubov)");
  }
  return t;
}

Table cmd_nlce(const json& cfg) {
  const json& n = cfg.at("nlce");
  only_keys(n, "nlce", {"lattice", "order", "property", "model", "params", "cap", "euler_start", "dh"});
  const LatticeKind lat = lattice_kind_from_string(n.at("lattice").get<std::string>());
  const Params p = n.at("params").get<Params>();
  const std::string prop = n.at("property").get<std::string>();
  ClusterProperty f = prop == "susceptibility"
                          ? susceptibility_property(p, n.value("dh", 1e-4))
                          : steady_state_property(n.value("model", std::string("xyz")), p, prop);
  NlceSeries s = nlce_series(lat, n.at("order").get<int>(), f, n.value("cap", -1), n.value("euler_start", 2));
  Table t{{"order", "bare", "euler"}, {}};
  for (size_t i = 0; i < s.order.size(); ++i) t.rows.push_back({double(s.order[i]), s.partial[i], s.euler[i]});
  return t;
}

// Negative zeros are printed as 0.
Table tidy(Table t) {
  for (auto& row : t.rows)
    for (double& v : row)
      if (v == 0.0) v = 0.0;
  return t;
}

std::string to_csv(const Table& t) { return table_csv(t.header, t.rows); }

std::string to_json_table(const Table& t) {
  json j;
  j["columns"] = t.header;
  j["rows"] = t.rows;
  return j.dump(1) + "\n";
}

}  // namespace

nlohmann::json resolve_config(const json& config, const Overrides& ov) {
  try {
    only_keys(config, "config",
              {"schema_version", "command", "model", "sweep", "observables", "times", "initial", "seed", "threads",
               "output", "steady", "spectrum", "traj", "scan", "gaussian", "semiclassical", "nlce"});
    json r = config;
    const int ver = r.value("schema_version", kSchemaVersion);
    if (ver != kSchemaVersion) throw InputError("schema_version " + std::to_string(ver) + " is not supported");
    r["schema_version"] = kSchemaVersion;
    const std::string cmd = need(r, "command", "config").get<std::string>();
    if (!kCommands.count(cmd)) throw InputError("unknown command '" + cmd + "'");

    if (ov.seed) r["seed"] = *ov.seed;
    if (ov.threads) r["threads"] = *ov.threads;
    if (!r.contains("threads")) r["threads"] = 1;
    if (r.at("threads").get<int>() < 1) throw InputError("threads must be >= 1");
    if (kStochastic.count(cmd) && !r.contains("seed")) throw InputError("command '" + cmd + "' needs a seed");
    if (r.contains("seed") && !r.at("seed").is_number_unsigned()) throw InputError("seed must be a nonnegative integer");

    json out = r.value("output", json::object());
    only_keys(out, "output", {"format", "name"});
    const std::string fmt = out.value("format", std::string("csv"));
    if (fmt != "csv" && fmt != "json") throw InputError("output.format must be csv or json");
    out["format"] = fmt;
    out["name"] = out.value("name", cmd);
    const std::string name = out["name"].get<std::string>();
    if (name.empty() || name.find('/') != std::string::npos) throw InputError("output.name must be a plain file stem");
    r["output"] = out;

    const bool needs_model = cmd == "steady" || cmd == "spectrum" || cmd == "evolve" || cmd == "traj";
    if (needs_model) {
      json m = need(r, "model", "config");
      if (m.contains("inline")) {
        only_keys(m, "model", {"inline"});
      } else {
        only_keys(m, "model", {"name", "params"});
        const std::string mname = need(m, "name", "model").get<std::string>();
        const auto names = catalog_names();
        if (std::find(names.begin(), names.end(), mname) == names.end())
          throw InputError("model.name: unknown '" + mname + "'");
        Params given = m.value("params", json::object()).get<Params>();
        Params full = catalog_defaults(mname);
        for (const auto& [k, v] : given) {
          if (!full.count(k)) throw InputError("model.params: unknown parameter '" + k + "' for " + mname);
          full[k] = v;
        }
        m["params"] = full;
      }
      r["model"] = m;
      if (!r.contains("observables")) r["observables"] = json::array();
      if (!r.at("observables").is_array()) throw InputError("observables must be an array of names");
    }
    if (cmd == "evolve" || cmd == "traj") {
      need(r, "times", "config");
      need(r, "initial", "config");
    }
    if (cmd == "traj") {
      json tj = need(r, "traj", "config");
      only_keys(tj, "traj", {"method", "n_traj", "dt"});
      tj["method"] = tj.value("method", std::string("qjump"));
      unravelling_from_string(tj["method"].get<std::string>());
      const long n = need(tj, "n_traj", "traj").get<long>();
      if (n < 1) throw InputError("traj.n_traj must be >= 1");
      tj["dt"] = tj.value("dt", 1e-3);
      if (!(tj["dt"].get<double>() > 0)) throw InputError("traj.dt must be positive");
      r["traj"] = tj;
    }
    if (cmd == "scan") {
      json sc = r.value("scan", json::object());
      only_keys(sc, "scan", {"Jx", "Jz", "gamma", "z", "t_max"});
      XyzMeanField d;
      sc["Jx"] = sc.value("Jx", d.jx);
      sc["Jz"] = sc.value("Jz", d.jz);
      sc["gamma"] = sc.value("gamma", d.gamma);
      sc["z"] = sc.value("z", d.z);
      sc["t_max"] = sc.value("t_max", 200.0);
      positive(sc, "t_max", "scan");
      r["scan"] = sc;
      need(r, "sweep", "config");
    }
    if (cmd == "gaussian") need(need(r, "gaussian", "config"), "problem", "gaussian");
    if (cmd == "semiclassical") need(need(r, "semiclassical", "config"), "problem", "semiclassical");
    if (cmd == "nlce") {
      json n = need(r, "nlce", "config");
      need(n, "lattice", "nlce");
      need(n, "order", "nlce");
      n["property"] = n.value("property", std::string("sz"));
      json given = n.value("params", json::object());
      if (n.value("model", std::string("xyz")) == "xyz" || n["property"] == "susceptibility") {
        Params full = catalog_defaults("xyz");
        for (const auto& [k, v] : given.items()) full[k] = v.get<double>();
        n["params"] = full;
      }
      r["nlce"] = n;
    }
    return r;
  } catch (const json::exception& e) {
    throw InputError(std::string("config: ") + e.what());
  }
}

Table execute(const json& r) {
  try {
    const std::string cmd = r.at("command").get<std::string>();
    if (cmd == "steady") return cmd_steady(r);
    if (cmd == "spectrum") return cmd_spectrum(r);
    if (cmd == "evolve") return cmd_evolve(r);
    if (cmd == "traj") return cmd_traj(r);
    if (cmd == "scan") return cmd_scan(r);
    if (cmd == "gaussian") return cmd_gaussian(r);
    if (cmd == "semiclassical") return cmd_semiclassical(r);
    return cmd_nlce(r);
  } catch (const json::exception& e) {
    throw InputError(std::string("config: ") + e.what());
  }
}

std::string sha256_hex(const std::string& bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (!EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr))
    throw std::runtime_error("sha256 failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 15];
  }
  return out;
}

void write_atomic(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp." + std::to_string(::getpid());
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw ResourceError("cannot open " + tmp + " for writing");
    f << content;
    f.flush();
    if (!f) throw ResourceError("write failed: " + tmp);
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp);
    throw ResourceError("cannot move " + tmp + " to " + path + ": " + ec.message());
  }
}

std::string run(const json& config, const Overrides& ov) {
  const auto start = std::chrono::steady_clock::now();
  const json r = resolve_config(config, ov);
  std::error_code ec;
  fs::create_directories(ov.out_dir, ec);
  if (ec) throw ResourceError("cannot create output directory " + ov.out_dir + ": " + ec.message());

  const Table t = tidy(execute(r));
  const std::string fmt = r.at("output").at("format").get<std::string>();
  const std::string data = fmt == "csv" ? to_csv(t) : to_json_table(t);
  const std::string path = (fs::path(ov.out_dir) / (r.at("output").at("name").get<std::string>() + "." + fmt)).string();
  write_atomic(path, data);

  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  json man;
  man["tool"] = "oqs-cli";
  man["version"] = OQS_VERSION;
  man["config"] = r;
  man["config_hash"] = sha256_hex(r.dump());
  man["wall_time_s"] = wall;
  man["outputs"] = json::array({{{"path", fs::path(path).filename().string()},
                                 {"sha256", sha256_hex(data)},
                                 {"rows", t.rows.size()},
                                 {"columns", t.header}}});
  write_atomic((fs::path(ov.out_dir) / "manifest.json").string(), man.dump(2) + "\n");
  return path;
}

}  // namespace oqs::cli
