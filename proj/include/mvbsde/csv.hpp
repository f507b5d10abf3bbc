#pragma once

#include <fstream>
#include <initializer_list>
#include <string>
#include <vector>

namespace mvbsde {

// CSV writer with 12 significant digits for floating-point fields.
class CsvWriter {
public:
    CsvWriter(const std::string& path, const std::vector<std::string>& header);

    CsvWriter& field(double v);
    CsvWriter& field(long long v);
    CsvWriter& field(const std::string& v);
    CsvWriter& empty();
    void end_row();

private:
    void sep();
    std::ofstream out_;
    bool first_ = true;
};

std::string format_double(double v);

}  // namespace mvbsde
