#include "sispatch/cli/result_table.hpp"

#include "sispatch/error.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>

namespace sispatch::cli {

ResultTable::ResultTable(std::vector<Column> columns) : columns_(std::move(columns)) {}

void ResultTable::add_row(std::vector<double> row)
{
    if (row.size() != columns_.size()) {
        throw Error(ErrorCode::InvalidArgument, "row width " + std::to_string(row.size()) + " != " +
                                                    std::to_string(columns_.size()) + " columns");
    }
    for (std::size_t c = 0; c < row.size(); ++c) {
        if (std::isnan(row[c]) && !columns_[c].nullable) {
            throw Error(ErrorCode::InvalidArgument, "NaN in column " + columns_[c].name);
        }
    }
    rows_.push_back(std::move(row));
}

void ResultTable::add_provenance(std::string line)
{
    provenance_.push_back(std::move(line));
}

std::size_t ResultTable::column_index(const std::string& name) const
{
    for (std::size_t c = 0; c < columns_.size(); ++c) {
        if (columns_[c].name == name) {
            return c;
        }
    }
    throw Error(ErrorCode::InvalidArgument, "no column " + name);
}

std::string format_number(double v)
{
    if (std::isnan(v)) {
        return "nan";
    }
    if (std::isinf(v)) {
        return v > 0 ? "inf" : "-inf";
    }
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void ResultTable::write_csv(std::ostream& out) const
{
    for (const auto& line : provenance_) {
        out << "# " << line << '\n';
    }
    std::string nullable;
    for (const auto& c : columns_) {
        if (c.nullable) {
            nullable += (nullable.empty() ? "" : ",") + c.name;
        }
    }
    if (!nullable.empty()) {
        out << "# nullable: " << nullable << '\n';
    }
    for (std::size_t c = 0; c < columns_.size(); ++c) {
        out << (c ? "," : "") << columns_[c].name;
    }
    out << '\n';
    for (const auto& row : rows_) {
        for (std::size_t c = 0; c < row.size(); ++c) {
            out << (c ? "," : "") << format_number(row[c]);
        }
        out << '\n';
    }
}

} // namespace sispatch::cli
