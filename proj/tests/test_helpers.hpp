#pragma once

#include <filesystem>
#include <vector>

#include "maasslab/data_io.hpp"

namespace maass_test {

inline const std::vector<maass::FormRecord>& fixture_records() {
    static const std::vector<maass::FormRecord> records = maass::load_dataset(
        std::filesystem::path(MAASSLAB_FIXTURE_DIR) / "maass_forms.jsonl");
    return records;
}

inline const maass::MaassFormData& fixture_form(std::size_t i) {
    static const std::vector<maass::MaassFormData> forms = [] {
        std::vector<maass::MaassFormData> out;
        for (const auto& rec : fixture_records()) out.push_back(maass::to_form(rec));
        return out;
    }();
    return forms.at(i);
}

}  // namespace maass_test
