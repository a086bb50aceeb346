#include "weakres/stl/signal.hpp"

#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include "weakres/error.hpp"

namespace weakres::stl {

Signal::Signal(std::vector<std::string> variables, Eigen::MatrixXd samples, double step_duration)
    : variables_(std::move(variables)), samples_(std::move(samples)), step_duration_(step_duration) {
    if (samples_.rows() < 1)
        throw InvalidInput("signal needs at least one sample");
    if (static_cast<std::size_t>(samples_.cols()) != variables_.size())
        throw InvalidInput("signal sample width " + std::to_string(samples_.cols()) +
                           " does not match " + std::to_string(variables_.size()) + " variables");
    std::set<std::string, std::less<>> seen;
    for (const auto& v : variables_) {
        if (v.empty())
            throw InvalidInput("empty signal variable name");
        if (!seen.insert(v).second)
            throw InvalidInput("duplicate signal variable '" + v + "'");
    }
    if (!(step_duration_ > 0.0))
        throw InvalidInput("step duration must be positive");
}

std::optional<Index> Signal::index_of(std::string_view name) const {
    for (std::size_t i = 0; i < variables_.size(); ++i)
        if (variables_[i] == name)
            return static_cast<Index>(i);
    return std::nullopt;
}

Index Signal::require_index(std::string_view name) const {
    if (auto i = index_of(name))
        return *i;
    throw InvalidInput("unknown signal variable '" + std::string(name) + "'");
}

double Signal::evaluate(const AffineExpr& expr, Index t) const {
    double v = expr.constant();
    for (const auto& [name, c] : expr.coefficients())
        v += c * samples_(t, require_index(name));
    return v;
}

Signal Signal::head(Index count) const {
    if (count < 1 || count > length())
        throw InvalidInput("signal head out of range");
    return Signal(variables_, samples_.topRows(count), step_duration_);
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, ',')) {
        auto b = cell.find_first_not_of(" \t\r");
        auto e = cell.find_last_not_of(" \t\r");
        cells.push_back(b == std::string::npos ? "" : cell.substr(b, e - b + 1));
    }
    if (!line.empty() && line.back() == ',')
        cells.emplace_back();
    return cells;
}

double parse_cell(const std::string& cell, int line, int column) {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
    if (ec != std::errc() || ptr != cell.data() + cell.size())
        throw ParseError("invalid number '" + cell + "'", line, column);
    return v;
}

} // namespace

Signal read_signal_csv(std::istream& in) {
    std::string line;
    int line_no = 0;
    double step_duration = 1.0;
    std::vector<std::string> header;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos)
            continue;
        if (line[0] == '#') {
            auto pos = line.find("step_duration=");
            if (pos != std::string::npos)
                step_duration = parse_cell(split_csv_line(line.substr(pos + 14)).at(0), line_no, 1);
            continue;
        }
        header = split_csv_line(line);
        break;
    }
    if (header.empty())
        throw ParseError("missing CSV header", line_no, 1);

    std::vector<std::vector<double>> rows;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos || line[0] == '#')
            continue;
        auto cells = split_csv_line(line);
        if (cells.size() != header.size())
            throw ParseError("expected " + std::to_string(header.size()) + " columns, found " +
                                 std::to_string(cells.size()),
                             line_no, 1);
        std::vector<double> row;
        for (std::size_t j = 0; j < cells.size(); ++j)
            row.push_back(parse_cell(cells[j], line_no, static_cast<int>(j) + 1));
        rows.push_back(std::move(row));
    }
    if (rows.empty())
        throw ParseError("signal has no samples", line_no, 1);

    Eigen::MatrixXd samples(static_cast<Index>(rows.size()), static_cast<Index>(header.size()));
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < header.size(); ++j)
            samples(static_cast<Index>(i), static_cast<Index>(j)) = rows[i][j];
    return Signal(std::move(header), std::move(samples), step_duration);
}

Signal read_signal_csv_file(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw InvalidInput("cannot open signal file '" + path + "'");
    return read_signal_csv(in);
}

void write_signal_csv(std::ostream& out, const Signal& signal) {
    if (signal.step_duration() != 1.0)
        out << "# step_duration=" << format_number(signal.step_duration()) << "\n";
    for (std::size_t j = 0; j < signal.variables().size(); ++j)
        out << (j ? "," : "") << signal.variables()[j];
    out << "\n";
    for (Index t = 0; t < signal.length(); ++t) {
        for (Index j = 0; j < signal.dimension(); ++j)
            out << (j ? "," : "") << format_number(signal(t, j));
        out << "\n";
    }
}

} // namespace weakres::stl
