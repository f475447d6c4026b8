#include "vtv/bank_io.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

namespace vtv {

using nlohmann::json;

std::string bank_to_json(const FilterBankd& bank) {
  Eigen::Index r = 0;
  for (const auto& k : bank.kernels()) r = std::max({r, k.radius_y(), k.radius_x()});
  json doc;
  doc["m"] = bank.size();
  doc["r"] = r;
  doc["kernels"] = json::array();
  for (std::size_t i = 0; i < bank.size(); ++i) {
    Kerneld::Taps taps = Kerneld::Taps::Zero(2 * r + 1, 2 * r + 1);
    const auto& k = bank.kernel(i);
    taps.block(r - k.radius_y(), r - k.radius_x(), k.taps().rows(), k.taps().cols()) = k.taps();
    std::vector<double> flat(taps.data(), taps.data() + taps.size());
    doc["kernels"].push_back({{"role", bank.role(i) == ChannelRole::Lowpass ? "lowpass" : "detail"},
                              {"taps", flat}});
  }
  return doc.dump(2);
}

FilterBankd bank_from_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bank json: ") + e.what());
  }
  try {
    const auto m = doc.at("m").get<std::size_t>();
    const auto r = doc.at("r").get<Eigen::Index>();
    const auto& list = doc.at("kernels");
    if (r < 0) throw ConfigError("bank json: negative r");
    if (list.size() != m) throw ConfigError("bank json: m does not match kernel count");
    const Eigen::Index n = 2 * r + 1;
    std::vector<Kerneld> kernels;
    std::vector<ChannelRole> roles;
    for (const auto& entry : list) {
      const auto flat = entry.at("taps").get<std::vector<double>>();
      if (static_cast<Eigen::Index>(flat.size()) != n * n) {
        throw ConfigError("bank json: expected " + std::to_string(n * n) + " taps");
      }
      kernels.emplace_back(Kerneld::Taps(Eigen::Map<const Kerneld::Taps>(flat.data(), n, n)));
      const auto role = entry.value("role", std::string("detail"));
      if (role != "lowpass" && role != "detail") throw ConfigError("bank json: bad role " + role);
      roles.push_back(role == "lowpass" ? ChannelRole::Lowpass : ChannelRole::Detail);
    }
    return FilterBankd(std::move(kernels), std::move(roles));
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bank json: ") + e.what());
  }
}

void save_bank(const std::filesystem::path& path, const FilterBankd& bank) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << bank_to_json(bank) << '\n';
}

FilterBankd load_bank(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return bank_from_json(ss.str());
}

}  // namespace vtv
