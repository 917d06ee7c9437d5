#include "c2bnet/io.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "c2bnet/grids.hpp"

namespace c2bnet::io {

using json = nlohmann::json;
using grids::Grid;

namespace {

constexpr std::uint32_t kFormatVersion = 1;

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void put_f64(std::string& out, double d) {
  put_u64(out, std::bit_cast<std::uint64_t>(d));
}

struct Reader {
  const std::string& buf;
  std::size_t pos = 0;

  void need(std::size_t n, const char* what) {
    if (pos + n > buf.size())
      throw IoError(std::string("truncated payload: ") + what);
  }
  std::uint32_t u32(const char* what) {
    need(4, what);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i)
      v |= static_cast<std::uint32_t>(static_cast<unsigned char>(buf[pos + i])) << (8 * i);
    pos += 4;
    return v;
  }
  std::uint64_t u64(const char* what) {
    need(8, what);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i)
      v |= static_cast<std::uint64_t>(static_cast<unsigned char>(buf[pos + i])) << (8 * i);
    pos += 8;
    return v;
  }
  double f64(const char* what) { return std::bit_cast<double>(u64(what)); }
};

} // namespace

json grid_to_json(const Grid& g) {
  json j;
  j["placement"] = g.placement == grids::NodePlacement::endpoints_included
                       ? "endpoints"
                       : "cells";
  switch (g.kind) {
    case grids::GridKind::line1d:
      j["kind"] = "line1d";
      j["a"] = g.a;
      j["b"] = g.b;
      j["n"] = g.n;
      break;
    case grids::GridKind::rect2d:
      j["kind"] = "rect2d";
      j["nx"] = g.nx;
      j["ny"] = g.ny;
      j["ax"] = g.ax;
      j["bx"] = g.bx;
      j["ay"] = g.ay;
      j["by"] = g.by;
      break;
    case grids::GridKind::angular_product:
      j["kind"] = "angular_product";
      j["nx"] = g.nx;
      j["ny"] = g.ny;
      j["ax"] = g.ax;
      j["bx"] = g.bx;
      j["ay"] = g.ay;
      j["by"] = g.by;
      j["n_dirs"] = g.n_dirs;
      break;
  }
  return j;
}

Grid grid_from_json(const json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  const grids::NodePlacement placement =
      j.at("placement").get<std::string>() == "endpoints"
          ? grids::NodePlacement::endpoints_included
          : grids::NodePlacement::cell_centered;
  if (kind == "line1d")
    return Grid::line1d(j.at("a").get<double>(), j.at("b").get<double>(),
                        j.at("n").get<std::size_t>(), placement);
  if (kind == "rect2d")
    return Grid::rect2d(j.at("nx").get<std::size_t>(),
                        j.at("ny").get<std::size_t>(), placement,
                        j.at("ax").get<double>(), j.at("bx").get<double>(),
                        j.at("ay").get<double>(), j.at("by").get<double>());
  if (kind == "angular_product")
    return Grid::angular_product(
        Grid::rect2d(j.at("nx").get<std::size_t>(),
                     j.at("ny").get<std::size_t>(), placement,
                     j.at("ax").get<double>(), j.at("bx").get<double>(),
                     j.at("ay").get<double>(), j.at("by").get<double>()),
        j.at("n_dirs").get<std::size_t>());
  throw IoError("unknown grid kind in header: " + kind);
}

namespace {

void write_file(const std::string& path, const char* magic,
                const json& header, const std::string& payload) {
  std::string out;
  out.append(magic, 4);
  put_u32(out, kFormatVersion);
  const std::string head = header.dump();
  put_u64(out, head.size());
  out += head;
  out += payload;

  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot open for writing: " + path);
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!f) throw IoError("write failed: " + path);
}

std::pair<json, std::string> read_file(const std::string& path,
                                       const char* magic) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open: " + path);
  std::string buf((std::istreambuf_iterator<char>(f)),
                  std::istreambuf_iterator<char>());
  if (buf.size() < 16) throw IoError("truncated payload: file shorter than header");
  if (std::memcmp(buf.data(), magic, 4) != 0)
    throw IoError("bad magic: not a " + std::string(magic, 4) + " file");
  Reader r{buf, 4};
  const std::uint32_t version = r.u32("version");
  if (version != kFormatVersion)
    throw IoError("unsupported container version " + std::to_string(version));
  const std::uint64_t head_len = r.u64("header length");
  r.need(head_len, "header");
  json header;
  try {
    header = json::parse(buf.substr(r.pos, head_len));
  } catch (const json::exception& e) {
    throw IoError(std::string("corrupt header: ") + e.what());
  }
  return {std::move(header), buf.substr(r.pos + head_len)};
}

} // namespace

void save_dataset(const pde::Dataset& ds, const std::string& path) {
  json header;
  header["problem"] = ds.problem;
  header["n"] = ds.size();
  header["d1"] = ds.inputs.cols();
  header["d2"] = ds.outputs.cols();
  header["input_grid"] = grid_to_json(ds.input_grid);
  header["output_grid"] = grid_to_json(ds.output_grid);
  header["master_seed"] = std::to_string(ds.master_seed); // 64-bit safe
  header["noise_sigma"] = ds.noise_sigma;
  header["blocks"] = json::array({"inputs", "outputs", "seeds"});

  std::string payload;
  payload.reserve(8 * (ds.inputs.size() + ds.outputs.size() + ds.size()));
  for (std::size_t i = 0; i < ds.inputs.size(); ++i)
    put_f64(payload, ds.inputs.data()[i]);
  for (std::size_t i = 0; i < ds.outputs.size(); ++i)
    put_f64(payload, ds.outputs.data()[i]);
  for (std::uint64_t s : ds.sample_seeds) put_u64(payload, s);

  write_file(path, "C2BD", header, payload);
}

pde::Dataset load_dataset(const std::string& path) {
  auto [header, payload] = read_file(path, "C2BD");
  pde::Dataset ds;
  try {
    ds.problem = header.at("problem").get<std::string>();
    const std::size_t n = header.at("n").get<std::size_t>();
    const std::size_t d1 = header.at("d1").get<std::size_t>();
    const std::size_t d2 = header.at("d2").get<std::size_t>();
    ds.input_grid = grid_from_json(header.at("input_grid"));
    ds.output_grid = grid_from_json(header.at("output_grid"));
    ds.master_seed = std::stoull(header.at("master_seed").get<std::string>());
    ds.noise_sigma = header.at("noise_sigma").get<double>();
    if (ds.input_grid.size() != d1 || ds.output_grid.size() != d2)
      throw IoError("shape inconsistency: grids do not match declared dims");

    Reader r{payload, 0};
    ds.inputs = numkit::Matrix(n, d1);
    for (std::size_t i = 0; i < n * d1; ++i)
      ds.inputs.data()[i] = r.f64("inputs block");
    ds.outputs = numkit::Matrix(n, d2);
    for (std::size_t i = 0; i < n * d2; ++i)
      ds.outputs.data()[i] = r.f64("outputs block");
    ds.sample_seeds.resize(n);
    for (std::size_t i = 0; i < n; ++i)
      ds.sample_seeds[i] = r.u64("seeds block");
    if (r.pos != payload.size())
      throw IoError("shape inconsistency: trailing bytes after declared blocks");
  } catch (const json::exception& e) {
    throw IoError(std::string("corrupt header: ") + e.what());
  }
  return ds;
}

void save_checkpoint(const model::C2BNet& net, const std::string& path) {
  json header;
  json layers = json::array();
  for (const nn::Layer& layer : net.net().layers()) {
    json l;
    l["in"] = layer.in_dim();
    l["out"] = layer.out_dim();
    l["has_bias"] = layer.has_bias;
    l["activation"] =
        layer.activation == nn::Activation::relu ? "relu" : "identity";
    layers.push_back(l);
  }
  header["layers"] = layers;
  header["input_grid"] = grid_to_json(net.input_grid());
  header["output_grid"] = grid_to_json(net.output_grid());
  header["d_low"] = net.d_low();
  header["blocks"] =
      json::array({"weights+bias per layer", "normalizer mean", "normalizer std"});

  std::string payload;
  for (const nn::Layer& layer : net.net().layers()) {
    for (std::size_t i = 0; i < layer.weights.size(); ++i)
      put_f64(payload, layer.weights.data()[i]);
    for (double b : layer.bias) put_f64(payload, b);
  }
  for (double m : net.normalizer().mean) put_f64(payload, m);
  for (double s : net.normalizer().std_dev) put_f64(payload, s);

  write_file(path, "C2BM", header, payload);
}

model::C2BNet load_checkpoint(const std::string& path) {
  auto [header, payload] = read_file(path, "C2BM");
  try {
    std::vector<nn::Layer> layers;
    Reader r{payload, 0};
    for (const json& l : header.at("layers")) {
      nn::Layer layer;
      const std::size_t in = l.at("in").get<std::size_t>();
      const std::size_t out = l.at("out").get<std::size_t>();
      layer.weights = numkit::Matrix(out, in);
      for (std::size_t i = 0; i < out * in; ++i)
        layer.weights.data()[i] = r.f64("weights block");
      layer.has_bias = l.at("has_bias").get<bool>();
      if (layer.has_bias) {
        layer.bias.resize(out);
        for (std::size_t i = 0; i < out; ++i) layer.bias[i] = r.f64("bias block");
      }
      layer.activation = l.at("activation").get<std::string>() == "relu"
                             ? nn::Activation::relu
                             : nn::Activation::identity;
      layers.push_back(std::move(layer));
    }
    const Grid input_grid = grid_from_json(header.at("input_grid"));
    const Grid output_grid = grid_from_json(header.at("output_grid"));

    model::Normalizer norm;
    norm.mean.resize(input_grid.size());
    for (double& m : norm.mean) m = r.f64("normalizer mean");
    norm.std_dev.resize(input_grid.size());
    for (double& s : norm.std_dev) s = r.f64("normalizer std");
    if (r.pos != payload.size())
      throw IoError("shape inconsistency: trailing bytes after declared blocks");

    model::C2BNet net(nn::Mlp(std::move(layers)), std::move(norm), input_grid,
                      output_grid);
    if (net.d_low() != header.at("d_low").get<std::size_t>())
      throw IoError("shape inconsistency: d_low does not match architecture");
    return net;
  } catch (const json::exception& e) {
    throw IoError(std::string("corrupt header: ") + e.what());
  }
}

} // namespace c2bnet::io
