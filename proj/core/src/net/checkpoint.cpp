#include "wcond/net/checkpoint.hpp"

#include <cstdio>
#include <cstdlib>
#include <istream>
#include <ostream>
#include <string>

namespace wcond::net {

namespace {

std::string hex(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%a", v);
  return buf;
}

double parse_hex(const std::string& tok) {
  char* end = nullptr;
  const double v = std::strtod(tok.c_str(), &end);
  if (end != tok.c_str() + tok.size()) {
    throw InvalidArgument("read_checkpoint: bad number '" + tok + "'");
  }
  return v;
}

std::string expect_line(std::istream& in, const std::string& what) {
  std::string line;
  if (!std::getline(in, line)) throw InvalidArgument("read_checkpoint: missing " + what);
  return line;
}

std::size_t keyed_count(const std::string& line, const std::string& key) {
  if (line.rfind(key + ' ', 0) != 0) {
    throw InvalidArgument("read_checkpoint: expected '" + key + " <n>', got '" + line + "'");
  }
  return std::stoull(line.substr(key.size() + 1));
}

void write_values(std::ostream& out, std::span<const double> v) {
  for (std::size_t i = 0; i < v.size(); ++i) out << (i ? " " : "") << hex(v[i]);
  out << '\n';
}

std::vector<double> read_values(std::istream& in, std::size_t n) {
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::string tok;
    if (!(in >> tok)) throw InvalidArgument("read_checkpoint: truncated values");
    v[i] = parse_hex(tok);
  }
  std::string rest;
  std::getline(in, rest);
  return v;
}

}  // namespace

void write_checkpoint(std::ostream& out, const Network& net) {
  out << "wcond-checkpoint " << kCheckpointVersion << '\n';
  out << "seed " << net.seed() << '\n';
  out << "layers " << net.layer_count() << '\n';
  for (const auto& s : net.specs()) out << describe(s) << '\n';
  out << "params " << net.param_count() << '\n';
  write_values(out, net.params());
  for (std::size_t k = 0; k < net.layer_count(); ++k) {
    if (!net.specs()[k].batch_norm) continue;
    const auto& st = net.bn_states()[k];
    out << "bn " << k << '\n';
    write_values(out, st.running_mean);
    write_values(out, st.running_var);
  }
  out << "end\n";
}

Network read_checkpoint(std::istream& in) {
  const std::string header = expect_line(in, "header");
  if (header != "wcond-checkpoint " + std::to_string(kCheckpointVersion)) {
    throw InvalidArgument("read_checkpoint: unsupported header '" + header + "'");
  }
  const std::string seed_line = expect_line(in, "seed");
  if (seed_line.rfind("seed ", 0) != 0) throw InvalidArgument("read_checkpoint: missing seed");
  const std::uint64_t seed = std::stoull(seed_line.substr(5));
  const std::size_t nl = keyed_count(expect_line(in, "layers"), "layers");
  std::vector<LayerSpec> specs;
  for (std::size_t k = 0; k < nl; ++k) specs.push_back(parse_layer(expect_line(in, "layer")));
  Network net(std::move(specs), seed);
  const std::size_t np = keyed_count(expect_line(in, "params"), "params");
  if (np != net.param_count()) throw InvalidArgument("read_checkpoint: parameter count mismatch");
  net.set_params(read_values(in, np));
  for (;;) {
    const std::string line = expect_line(in, "end");
    if (line == "end") break;
    const std::size_t k = keyed_count(line, "bn");
    if (k >= net.layer_count() || !net.specs()[k].batch_norm) {
      throw InvalidArgument("read_checkpoint: bn block for a layer without batch norm");
    }
    const std::size_t u = net.specs()[k].units();
    net.bn_states()[k].running_mean = read_values(in, u);
    net.bn_states()[k].running_var = read_values(in, u);
  }
  return net;
}

}  // namespace wcond::net
