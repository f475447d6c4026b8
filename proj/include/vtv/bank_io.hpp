#ifndef VTV_BANK_IO_HPP
#define VTV_BANK_IO_HPP

#include <filesystem>
#include <string>

#include "vtv/filter_bank.hpp"

namespace vtv {

// Filter bank document:
//   {"m": 9, "r": 1,
//    "kernels": [{"role": "lowpass", "taps": [ ... (2r+1)^2 values, row-major ... ]}, ...]}
// Kernels narrower than r are zero-padded on export.

std::string bank_to_json(const FilterBankd& bank);
FilterBankd bank_from_json(const std::string& text);

void save_bank(const std::filesystem::path& path, const FilterBankd& bank);
FilterBankd load_bank(const std::filesystem::path& path);

}  // namespace vtv

#endif  // VTV_BANK_IO_HPP
