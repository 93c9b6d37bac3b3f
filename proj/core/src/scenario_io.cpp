#include "hwigs/scenario_io.hpp"

#include "hwigs/errors.hpp"

#include <json.hpp>

#include <cerrno>
#include <cstdio>
#include <cstdlib>

namespace hwigs {
namespace {

using nlohmann::json;

json imbalance_json(const ImbalanceParams& p) { return {{"amplitude", p.amplitude}, {"phase", p.phase}}; }

const json& field(const json& j, const char* name) {
  if (!j.contains(name)) throw InvalidArgument(std::string("scenario: missing field '") + name + "'");
  return j.at(name);
}

template <typename T>
T get_field(const json& j, const char* name) {
  try {
    return field(j, name).get<T>();
  } catch (const json::exception& ex) {
    throw InvalidArgument(std::string("scenario: field '") + name + "': " + ex.what());
  }
}

ImbalanceParams imbalance_from(const json& j, const char* name) {
  const json& node = field(j, name);
  ImbalanceParams p;
  p.amplitude = get_field<std::vector<double>>(node, "amplitude");
  p.phase = get_field<std::vector<double>>(node, "phase");
  return p;
}

}  // namespace

std::string to_hex_float(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%a", x);
  return buf;
}

double from_hex_float(const std::string& text) {
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(text.c_str(), &end);
  if (end == text.c_str() || *end != '\0' || errno == ERANGE) {
    throw InvalidArgument("scenario: bad float literal '" + text + "'");
  }
  return v;
}

std::string dump_scenario(const NetworkScenario& s, bool include_channels) {
  json j;
  j["format"] = "hwigs-scenario";
  j["version"] = kScenarioFormatVersion;
  j["seed"] = s.seed;
  j["users"] = s.users;
  j["n_tx"] = s.n_tx;
  j["n_rx"] = s.n_rx;
  j["tx_imbalance"] = imbalance_json(s.tx_imb);
  j["rx_imbalance"] = imbalance_json(s.rx_imb);
  j["sigma2_tx"] = s.distortion.sigma2_tx;
  j["sigma2_rx"] = s.distortion.sigma2_rx;
  j["power_budget"] = s.power_budget;
  j["eta"] = s.eta;
  j["p_static"] = s.p_static;
  if (include_channels) {
    json grid = json::array();
    for (const auto& row : s.channels) {
      json jrow = json::array();
      for (const auto& h : row) {
        json entries = json::array();
        for (Eigen::Index r = 0; r < h.rows(); ++r) {
          for (Eigen::Index c = 0; c < h.cols(); ++c) {
            entries.push_back({to_hex_float(h(r, c).real()), to_hex_float(h(r, c).imag())});
          }
        }
        jrow.push_back(std::move(entries));
      }
      grid.push_back(std::move(jrow));
    }
    j["channels"] = std::move(grid);
  }
  return j.dump(2) + "\n";
}

NetworkScenario parse_scenario(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& ex) {
    throw InvalidArgument(std::string("scenario: ") + ex.what());
  }
  if (get_field<std::string>(j, "format") != "hwigs-scenario") {
    throw InvalidArgument("scenario: field 'format' must be \"hwigs-scenario\"");
  }
  if (const int version = get_field<int>(j, "version"); version != kScenarioFormatVersion) {
    throw InvalidArgument("scenario: unsupported version " + std::to_string(version));
  }

  ScenarioParams dims;
  dims.users = get_field<int>(j, "users");
  dims.n_tx = get_field<int>(j, "n_tx");
  dims.n_rx = get_field<int>(j, "n_rx");
  const auto seed = get_field<std::uint64_t>(j, "seed");

  NetworkScenario s;
  if (j.contains("channels")) {
    s.seed = seed;
    s.users = dims.users;
    s.n_tx = dims.n_tx;
    s.n_rx = dims.n_rx;
    const json& grid = j.at("channels");
    const auto k = static_cast<std::size_t>(dims.users);
    if (!grid.is_array() || grid.size() != k) throw InvalidArgument("scenario: field 'channels' must be users x users");
    s.channels.assign(k, std::vector<ComplexMat>(k));
    for (std::size_t a = 0; a < k; ++a) {
      if (!grid[a].is_array() || grid[a].size() != k) {
        throw InvalidArgument("scenario: field 'channels' must be users x users");
      }
      for (std::size_t b = 0; b < k; ++b) {
        const json& entries = grid[a][b];
        const auto expected = static_cast<std::size_t>(dims.n_rx * dims.n_tx);
        if (!entries.is_array() || entries.size() != expected) {
          throw InvalidArgument("scenario: channels[" + std::to_string(a) + "][" + std::to_string(b) +
                                "] must hold n_rx*n_tx entries");
        }
        ComplexMat h(dims.n_rx, dims.n_tx);
        std::size_t idx = 0;
        for (Eigen::Index r = 0; r < h.rows(); ++r) {
          for (Eigen::Index c = 0; c < h.cols(); ++c, ++idx) {
            const json& pair = entries[idx];
            if (!pair.is_array() || pair.size() != 2 || !pair[0].is_string() || !pair[1].is_string()) {
              throw InvalidArgument("scenario: channel entries must be [re, im] hex-float strings");
            }
            h(r, c) = {from_hex_float(pair[0].get<std::string>()), from_hex_float(pair[1].get<std::string>())};
          }
        }
        s.channels[a][b] = std::move(h);
      }
    }
  } else {
    s = draw_scenario(dims, seed);
  }

  s.tx_imb = imbalance_from(j, "tx_imbalance");
  s.rx_imb = imbalance_from(j, "rx_imbalance");
  s.distortion.sigma2_tx = get_field<double>(j, "sigma2_tx");
  s.distortion.sigma2_rx = get_field<double>(j, "sigma2_rx");
  s.power_budget = get_field<std::vector<double>>(j, "power_budget");
  s.eta = get_field<std::vector<double>>(j, "eta");
  s.p_static = get_field<std::vector<double>>(j, "p_static");
  s.validate();
  return s;
}

}  // namespace hwigs
