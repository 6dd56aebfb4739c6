#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace sispatch::cli {

struct Column {
    std::string name;
    /// NaN marks an undefined value (e.g. no dI** on this grid)
    bool nullable = false;
};

class ResultTable {
public:
    explicit ResultTable(std::vector<Column> columns);

    /// Throws InvalidArgument on a width mismatch or a NaN in a column that
    /// is not nullable.
    void add_row(std::vector<double> row);

    void add_provenance(std::string line);

    const std::vector<Column>& columns() const noexcept { return columns_; }
    const std::vector<std::vector<double>>& rows() const noexcept { return rows_; }
    std::size_t column_index(const std::string& name) const;

    /// '#' comment lines, header row, then rows at 17 significant digits.
    void write_csv(std::ostream& out) const;

private:
    std::vector<Column> columns_;
    std::vector<std::vector<double>> rows_;
    std::vector<std::string> provenance_;
};

/// Doubles formatted as %.17g; "nan", "inf", "-inf" for the non-finite ones.
std::string format_number(double v);

} // namespace sispatch::cli
