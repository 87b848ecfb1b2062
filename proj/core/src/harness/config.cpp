#include "wcond/harness/config.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "wcond/errors.hpp"
#include "wcond/net/idx.hpp"
#include "wcond/net/network.hpp"
#include "wcond/rng.hpp"

namespace wcond::harness {

using nlohmann::json;

namespace {

constexpr std::string_view kKindNames[] = {"vds", "quad", "train_compare", "hessian_compare",
                                           "cond_report"};
constexpr std::string_view kSectionNames[] = {"vds", "quad", "train", "hessian", "cond"};

std::string_view section_name(ExperimentKind k) { return kSectionNames[static_cast<int>(k)]; }

const std::vector<std::string> kArms = {"none",  "bn",       "bn_ws",    "bn_wn",
                                        "bn_e",  "e_static", "e_reparam"};
const std::vector<std::string> kQuadArms = {"none", "row_equilibration", "column_equilibration",
                                            "row_column_equilibration", "jacobi"};
const std::vector<std::string> kCondKinds = {"row_equilibration", "column_equilibration",
                                             "jacobi"};

// Reads the keys of one JSON object; anything left unread is an error.
class Reader {
 public:
  Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) fail(path_, "expected an object");
  }

  [[noreturn]] static void fail(const std::string& path, const std::string& msg) {
    throw ConfigError("config: " + (path.empty() ? std::string("<root>") : path) + ": " + msg);
  }

  std::string key_path(std::string_view key) const {
    return path_.empty() ? std::string(key) : path_ + "." + std::string(key);
  }

  const json* find(std::string_view key) {
    seen_.insert(std::string(key));
    const auto it = j_.find(std::string(key));
    return it == j_.end() ? nullptr : &*it;
  }

  void get(std::string_view key, std::size_t& out) {
    if (const json* v = find(key)) out = to_size(*v, key_path(key));
  }
  void get_u64(std::string_view key, std::uint64_t& out) {
    if (const json* v = find(key)) {
      if (!v->is_number_unsigned() && !(v->is_number_integer() && v->get<std::int64_t>() >= 0)) {
        fail(key_path(key), "expected a non-negative integer");
      }
      out = v->get<std::uint64_t>();
    }
  }
  void get(std::string_view key, std::uint32_t& out) {
    std::size_t tmp = out;
    get(key, tmp);
    if (tmp > 0xffffffffULL) fail(key_path(key), "out of range");
    out = static_cast<std::uint32_t>(tmp);
  }
  void get(std::string_view key, double& out) {
    if (const json* v = find(key)) out = to_double(*v, key_path(key));
  }
  void get(std::string_view key, std::string& out) {
    if (const json* v = find(key)) {
      if (!v->is_string()) fail(key_path(key), "expected a string");
      out = v->get<std::string>();
    }
  }
  void get(std::string_view key, std::vector<double>& out) {
    if (const json* v = find(key)) {
      if (!v->is_array()) fail(key_path(key), "expected an array of numbers");
      out.clear();
      for (std::size_t i = 0; i < v->size(); ++i) {
        out.push_back(to_double((*v)[i], key_path(key) + "[" + std::to_string(i) + "]"));
      }
    }
  }
  void get(std::string_view key, std::vector<std::string>& out) {
    if (const json* v = find(key)) {
      if (!v->is_array()) fail(key_path(key), "expected an array of strings");
      out.clear();
      for (const auto& e : *v) {
        if (!e.is_string()) fail(key_path(key), "expected an array of strings");
        out.push_back(e.get<std::string>());
      }
    }
  }

  void finish() const {
    for (const auto& [k, v] : j_.items()) {
      if (!seen_.count(k)) fail(key_path(k), "unknown key");
    }
  }

  static std::size_t to_size(const json& v, const std::string& path) {
    if (v.is_number_unsigned()) return v.get<std::size_t>();
    if (v.is_number_integer() && v.get<std::int64_t>() >= 0) return v.get<std::size_t>();
    fail(path, "expected a non-negative integer");
  }
  static double to_double(const json& v, const std::string& path) {
    if (!v.is_number()) fail(path, "expected a number");
    return v.get<double>();
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

net::Activation activation_from(const std::string& s, const std::string& path) {
  const auto a = net::parse_activation(s);
  if (!a) Reader::fail(path, "unknown activation '" + s + "'");
  return *a;
}

net::LossKind loss_from(const std::string& s, const std::string& path) {
  const auto l = net::parse_loss(s);
  if (!l) Reader::fail(path, "unknown loss '" + s + "'");
  return *l;
}

net::EquilibrationAxis axis_from(const std::string& s, const std::string& path) {
  const auto a = net::parse_axis(s);
  if (!a) Reader::fail(path, "unknown axis '" + s + "'");
  return *a;
}

void read_dataset(const json& j, const std::string& path, DatasetConfig& d) {
  Reader r(j, path);
  r.get("kind", d.kind);
  r.get("samples", d.samples);
  r.get("in_dim", d.in_dim);
  r.get("hidden", d.hidden);
  r.get("out_dim", d.out_dim);
  r.get("teacher_kappa", d.teacher_kappa);
  r.get("noise", d.noise);
  r.get("teacher_activation", d.teacher_activation);
  r.get("images", d.images);
  r.get("labels", d.labels);
  r.get("positive_label", d.positive_label);
  r.finish();
}

net::LayerSpec read_layer(const json& j, const std::string& path) {
  Reader r(j, path);
  std::string type = "dense", act = "identity";
  r.get("type", type);
  r.get("activation", act);
  net::LayerSpec spec;
  if (type == "dense") {
    net::DenseShape d;
    r.get("in", d.in);
    r.get("out", d.out);
    spec.shape = d;
  } else if (type == "conv2d") {
    net::ConvShape c;
    r.get("in_channels", c.in_channels);
    r.get("out_channels", c.out_channels);
    r.get("kernel", c.kernel);
    r.get("stride", c.stride);
    r.get("padding", c.padding);
    r.get("height", c.in_height);
    r.get("width", c.in_width);
    spec.shape = c;
  } else {
    Reader::fail(path + ".type", "expected 'dense' or 'conv2d'");
  }
  spec.activation = activation_from(act, path + ".activation");
  r.finish();
  return spec;
}

void read_arch(Reader& r, std::vector<net::LayerSpec>& arch) {
  if (const json* v = r.find("arch")) {
    if (!v->is_array()) Reader::fail(r.key_path("arch"), "expected an array of layers");
    arch.clear();
    for (std::size_t i = 0; i < v->size(); ++i) {
      arch.push_back(read_layer((*v)[i], r.key_path("arch") + "[" + std::to_string(i) + "]"));
    }
  }
}

void read_section(const json& j, ExperimentConfig& c) {
  const std::string path(section_name(c.kind));
  Reader r(j, path);
  switch (c.kind) {
    case ExperimentKind::vds: {
      auto& v = c.vds;
      r.get("rows", v.rows);
      r.get("cols", v.cols);
      r.get("trials", v.trials);
      r.get("row_imbalance", v.row_imbalance);
      r.get("p_mode", v.p_mode);
      r.get("p_range", v.p_range);
      r.get("rank_tol", v.rank_tol);
      r.get("equil_tol", v.equil_tol);
      r.get("threads", v.threads);
      break;
    }
    case ExperimentKind::quad: {
      auto& q = c.quad;
      if (const json* m = r.find("matrix")) {
        if (!m->is_array()) Reader::fail(r.key_path("matrix"), "expected an array of rows");
        q.matrix.clear();
        for (std::size_t i = 0; i < m->size(); ++i) {
          const auto& row = (*m)[i];
          const std::string rp = r.key_path("matrix") + "[" + std::to_string(i) + "]";
          if (!row.is_array()) Reader::fail(rp, "expected an array of numbers");
          std::vector<double> vals;
          for (std::size_t k = 0; k < row.size(); ++k) {
            vals.push_back(Reader::to_double(row[k], rp + "[" + std::to_string(k) + "]"));
          }
          q.matrix.push_back(std::move(vals));
        }
      }
      r.get("n", q.n);
      r.get("kappa", q.kappa);
      r.get("rhs", q.rhs);
      r.get("rhos", q.rhos);
      r.get("arms", q.arms);
      r.get("max_iters", q.max_iters);
      r.get("tolerance", q.tolerance);
      break;
    }
    case ExperimentKind::train_compare: {
      auto& t = c.train;
      if (const json* d = r.find("dataset")) read_dataset(*d, r.key_path("dataset"), t.dataset);
      read_arch(r, t.arch);
      std::string loss(net::to_string(t.loss)), axis(net::to_string(t.axis));
      r.get("loss", loss);
      r.get("axis", axis);
      t.loss = loss_from(loss, r.key_path("loss"));
      t.axis = axis_from(axis, r.key_path("axis"));
      r.get("arms", t.arms);
      r.get("epochs", t.epochs);
      r.get("batch_size", t.batch_size);
      r.get("lr", t.lr);
      r.get("momentum", t.momentum);
      r.get("conditioned_layers", t.conditioned_layers);
      r.get("bn_e_mode", t.bn_e_mode);
      r.get("lr_sweep", t.lr_sweep);
      r.get("sweep_epochs", t.sweep_epochs);
      r.get("divergence_factor", t.divergence_factor);
      r.get("threads", t.threads);
      break;
    }
    case ExperimentKind::hessian_compare: {
      auto& h = c.hessian;
      if (const json* d = r.find("dataset")) read_dataset(*d, r.key_path("dataset"), h.dataset);
      read_arch(r, h.arch);
      std::string loss(net::to_string(h.loss)), axis(net::to_string(h.axis));
      r.get("loss", loss);
      r.get("axis", axis);
      h.loss = loss_from(loss, r.key_path("loss"));
      h.axis = axis_from(axis, r.key_path("axis"));
      r.get("n_points", h.n_points);
      r.get("rank_tol", h.rank_tol);
      r.get("tolerance", h.tolerance);
      r.get("reference_epochs", h.reference_epochs);
      r.get("reference_lr", h.reference_lr);
      r.get("reference_momentum", h.reference_momentum);
      r.get("reference_batch_size", h.reference_batch_size);
      break;
    }
    case ExperimentKind::cond_report:
      r.get("kinds", c.cond.kinds);
      break;
  }
  r.finish();
}

json dataset_json(const DatasetConfig& d) {
  json j;
  j["kind"] = d.kind;
  j["samples"] = d.samples;
  j["noise"] = d.noise;
  if (d.kind == "teacher") {
    j["in_dim"] = d.in_dim;
    j["hidden"] = d.hidden;
    j["out_dim"] = d.out_dim;
    j["teacher_kappa"] = d.teacher_kappa;
    j["teacher_activation"] = d.teacher_activation;
  } else if (d.kind == "idx") {
    j["images"] = d.images;
    j["labels"] = d.labels;
    j["positive_label"] = d.positive_label;
  }
  return j;
}

json arch_json(const std::vector<net::LayerSpec>& arch) {
  json a = json::array();
  for (const auto& s : arch) {
    json l;
    l["activation"] = std::string(net::to_string(s.activation));
    if (s.is_conv()) {
      const auto& c = s.conv();
      l["type"] = "conv2d";
      l["in_channels"] = c.in_channels;
      l["out_channels"] = c.out_channels;
      l["kernel"] = c.kernel;
      l["stride"] = c.stride;
      l["padding"] = c.padding;
      l["height"] = c.in_height;
      l["width"] = c.in_width;
    } else {
      const auto& d = std::get<net::DenseShape>(s.shape);
      l["type"] = "dense";
      l["in"] = d.in;
      l["out"] = d.out;
    }
    a.push_back(std::move(l));
  }
  return a;
}

json section_json(const ExperimentConfig& c) {
  json j;
  switch (c.kind) {
    case ExperimentKind::vds: {
      const auto& v = c.vds;
      j = {{"rows", v.rows},         {"cols", v.cols},           {"trials", v.trials},
           {"row_imbalance", v.row_imbalance}, {"p_mode", v.p_mode}, {"p_range", v.p_range},
           {"rank_tol", v.rank_tol}, {"equil_tol", v.equil_tol}, {"threads", v.threads}};
      // Thread count does not change results; keep it out of the identity.
      j.erase("threads");
      break;
    }
    case ExperimentKind::quad: {
      const auto& q = c.quad;
      j = {{"rhs", q.rhs},         {"rhos", q.rhos},           {"arms", q.arms},
           {"max_iters", q.max_iters}, {"tolerance", q.tolerance}};
      if (q.matrix.empty()) {
        j["n"] = q.n;
        j["kappa"] = q.kappa;
      } else {
        j["matrix"] = q.matrix;
      }
      break;
    }
    case ExperimentKind::train_compare: {
      const auto& t = c.train;
      j = {{"dataset", dataset_json(t.dataset)},
           {"arch", arch_json(t.arch)},
           {"loss", std::string(net::to_string(t.loss))},
           {"axis", std::string(net::to_string(t.axis))},
           {"arms", t.arms},
           {"epochs", t.epochs},
           {"batch_size", t.batch_size},
           {"lr", t.lr},
           {"momentum", t.momentum},
           {"conditioned_layers", t.conditioned_layers},
           {"bn_e_mode", t.bn_e_mode},
           {"lr_sweep", t.lr_sweep},
           {"sweep_epochs", t.sweep_epochs},
           {"divergence_factor", t.divergence_factor}};
      break;
    }
    case ExperimentKind::hessian_compare: {
      const auto& h = c.hessian;
      j = {{"dataset", dataset_json(h.dataset)},
           {"arch", arch_json(h.arch)},
           {"loss", std::string(net::to_string(h.loss))},
           {"axis", std::string(net::to_string(h.axis))},
           {"n_points", h.n_points},
           {"rank_tol", h.rank_tol},
           {"tolerance", h.tolerance},
           {"reference_epochs", h.reference_epochs},
           {"reference_lr", h.reference_lr},
           {"reference_momentum", h.reference_momentum},
           {"reference_batch_size", h.reference_batch_size}};
      break;
    }
    case ExperimentKind::cond_report:
      j = {{"kinds", c.cond.kinds}};
      break;
  }
  return j;
}

bool contains(const std::vector<std::string>& set, const std::string& v) {
  return std::find(set.begin(), set.end(), v) != set.end();
}

void check(bool ok, const std::string& path, const std::string& msg) {
  if (!ok) Reader::fail(path, msg);
}

void validate_dataset(const DatasetConfig& d, const std::string& p) {
  check(d.kind == "teacher" || d.kind == "two_moons" || d.kind == "idx", p + ".kind",
        "expected teacher, two_moons or idx");
  check(d.kind == "idx" || (d.samples >= 2 && d.samples <= 100000), p + ".samples",
        "must lie in [2, 100000]");
  check(d.noise >= 0.0, p + ".noise", "must be >= 0");
  if (d.kind == "teacher") {
    check(d.in_dim >= 1 && d.hidden >= 1 && d.out_dim >= 1, p, "teacher dims must be >= 1");
    check(d.teacher_kappa >= 1.0, p + ".teacher_kappa", "must be >= 1");
    check(net::parse_activation(d.teacher_activation).has_value(), p + ".teacher_activation",
          "unknown activation");
  }
  if (d.kind == "idx") {
    check(!d.images.empty() && !d.labels.empty(), p, "idx needs images and labels paths");
    check(d.positive_label <= 255, p + ".positive_label", "must fit in a byte");
  }
}

void validate_arch(const std::vector<net::LayerSpec>& arch, const std::string& p) {
  check(!arch.empty(), p, "needs at least one layer");
  try {
    net::Network probe(arch, 0);
  } catch (const InvalidArgument& e) {
    Reader::fail(p, e.what());
  }
}

}  // namespace

std::string_view to_string(ExperimentKind k) { return kKindNames[static_cast<int>(k)]; }

ExperimentKind parse_experiment_kind(std::string_view s) {
  for (int i = 0; i < 5; ++i) {
    if (kKindNames[i] == s) return static_cast<ExperimentKind>(i);
  }
  throw ConfigError("config: experiment: unknown kind '" + std::string(s) + "'");
}

const std::vector<std::string>& arm_names() { return kArms; }

ExperimentConfig default_config(ExperimentKind kind) {
  ExperimentConfig c;
  c.kind = kind;
  c.hessian.dataset.in_dim = 2;
  c.hessian.dataset.samples = 128;
  return c;
}

ExperimentConfig parse_config(std::string_view text) {
  json j;
  try {
    j = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config: invalid JSON: ") + e.what());
  }
  Reader r(j, "");
  std::string kind;
  r.get("experiment", kind);
  if (kind.empty()) Reader::fail("experiment", "missing");
  ExperimentConfig c = default_config(parse_experiment_kind(kind));
  r.get_u64("seed", c.seed);
  r.get("output_dir", c.output_dir);
  if (const json* s = r.find(section_name(c.kind))) read_section(*s, c);
  r.finish();
  validate(c);
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("config: cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

void validate(const ExperimentConfig& c) {
  const std::string s(section_name(c.kind));
  switch (c.kind) {
    case ExperimentKind::vds: {
      const auto& v = c.vds;
      check(v.rows >= 1 && v.rows <= 256 && v.cols >= 1 && v.cols <= 256, s,
            "rows and cols must lie in [1, 256]");
      check(v.trials >= 1 && v.trials <= 1000000, s + ".trials", "must lie in [1, 1e6]");
      check(v.row_imbalance >= 1.0, s + ".row_imbalance", "must be >= 1");
      check(v.p_mode == "random" || v.p_mode == "equilibration", s + ".p_mode",
            "expected random or equilibration");
      check(v.p_range >= 1.0, s + ".p_range", "must be >= 1");
      check(v.rank_tol > 0.0 && v.rank_tol < 1.0, s + ".rank_tol", "must lie in (0, 1)");
      check(v.equil_tol >= 0.0, s + ".equil_tol", "must be >= 0");
      check(v.threads >= 1 && v.threads <= 256, s + ".threads", "must lie in [1, 256]");
      break;
    }
    case ExperimentKind::quad: {
      const auto& q = c.quad;
      if (!q.matrix.empty()) {
        for (const auto& row : q.matrix) {
          check(row.size() == q.matrix.size(), s + ".matrix", "must be square");
        }
      } else {
        check(q.n >= 1 && q.n <= 512, s + ".n", "must lie in [1, 512]");
        check(q.kappa >= 1.0, s + ".kappa", "must be >= 1");
      }
      check(q.rhs == "random" || q.rhs == "zero", s + ".rhs", "expected random or zero");
      check(!q.rhos.empty(), s + ".rhos", "must not be empty");
      for (double r : q.rhos) check(r > 0.0 && r < 10.0, s + ".rhos", "entries must lie in (0, 10)");
      check(!q.arms.empty(), s + ".arms", "must not be empty");
      for (const auto& a : q.arms) check(contains(kQuadArms, a), s + ".arms", "unknown arm '" + a + "'");
      check(q.max_iters >= 1 && q.max_iters <= 1000000, s + ".max_iters", "must lie in [1, 1e6]");
      check(q.tolerance > 0.0, s + ".tolerance", "must be > 0");
      break;
    }
    case ExperimentKind::train_compare: {
      const auto& t = c.train;
      validate_dataset(t.dataset, s + ".dataset");
      validate_arch(t.arch, s + ".arch");
      check(!t.arms.empty(), s + ".arms", "must not be empty");
      std::set<std::string> uniq;
      for (const auto& a : t.arms) {
        check(contains(kArms, a), s + ".arms", "unknown arm '" + a + "'");
        check(uniq.insert(a).second, s + ".arms", "duplicate arm '" + a + "'");
      }
      check(t.epochs >= 1 && t.epochs <= 100000, s + ".epochs", "must lie in [1, 1e5]");
      check(t.lr > 0.0, s + ".lr", "must be > 0");
      check(t.momentum >= 0.0 && t.momentum < 1.0, s + ".momentum", "must lie in [0, 1)");
      check(t.conditioned_layers == "all" || t.conditioned_layers == "hidden",
            s + ".conditioned_layers", "expected all or hidden");
      check(t.bn_e_mode == "reparam" || t.bn_e_mode == "static", s + ".bn_e_mode",
            "expected reparam or static");
      for (double lr : t.lr_sweep) check(lr > 0.0, s + ".lr_sweep", "entries must be > 0");
      check(t.sweep_epochs >= 1, s + ".sweep_epochs", "must be >= 1");
      check(t.divergence_factor > 0.0, s + ".divergence_factor", "must be > 0");
      check(t.threads >= 1 && t.threads <= 256, s + ".threads", "must lie in [1, 256]");
      break;
    }
    case ExperimentKind::hessian_compare: {
      const auto& h = c.hessian;
      validate_dataset(h.dataset, s + ".dataset");
      validate_arch(h.arch, s + ".arch");
      check(h.n_points <= 10000, s + ".n_points", "must be <= 10000");
      check(h.rank_tol > 0.0 && h.rank_tol < 1.0, s + ".rank_tol", "must lie in (0, 1)");
      check(h.tolerance >= 0.0, s + ".tolerance", "must be >= 0");
      check(h.reference_epochs >= 1, s + ".reference_epochs", "must be >= 1");
      check(h.reference_lr > 0.0, s + ".reference_lr", "must be > 0");
      check(h.reference_momentum >= 0.0 && h.reference_momentum < 1.0, s + ".reference_momentum",
            "must lie in [0, 1)");
      break;
    }
    case ExperimentKind::cond_report:
      check(!c.cond.kinds.empty(), s + ".kinds", "must not be empty");
      for (const auto& k : c.cond.kinds) {
        check(contains(kCondKinds, k), s + ".kinds", "unknown kind '" + k + "'");
      }
      break;
  }
}

std::string canonical_json(const ExperimentConfig& c) {
  json j;
  j["experiment"] = std::string(to_string(c.kind));
  j["seed"] = c.seed;
  j[std::string(section_name(c.kind))] = section_json(c);
  return j.dump();
}

std::uint64_t config_hash(const ExperimentConfig& c, std::string_view extra) {
  return fnv1a64(extra, fnv1a64(canonical_json(c)));
}

net::Dataset make_dataset(const DatasetConfig& d, std::uint64_t seed) {
  if (d.kind == "teacher") {
    net::TeacherSpec spec;
    spec.samples = d.samples;
    spec.in_dim = d.in_dim;
    spec.hidden = d.hidden;
    spec.out_dim = d.out_dim;
    spec.teacher_kappa = d.teacher_kappa;
    spec.noise = d.noise;
    spec.activation = *net::parse_activation(d.teacher_activation);
    return net::teacher_student(spec, seed).data;
  }
  if (d.kind == "two_moons") return net::two_moons(d.samples, d.noise, seed);
  const auto images = net::read_idx_file(d.images);
  const auto labels = net::read_idx_file(d.labels);
  return net::idx_binary_dataset(images, labels, static_cast<std::uint8_t>(d.positive_label),
                                 d.samples);
}

}  // namespace wcond::harness
