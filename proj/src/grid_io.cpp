#include <fstream>
#include <sstream>

#include "mcmc_certify/error.hpp"
#include "mcmc_certify/format.hpp"
#include "mcmc_certify/spectral.hpp"

namespace certify {

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot open " + path.string() + " for writing");
    return out;
}

std::ifstream open_in(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path.string());
    return in;
}

double parse_double(const std::string& field, const std::filesystem::path& path) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(field, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || field.find_first_not_of(" \t\r", used) != std::string::npos) {
        throw InvalidArgument(path.string() + ": not a number: '" + field + "'");
    }
    return v;
}

std::vector<double> read_column(const std::filesystem::path& path) {
    auto in = open_in(path);
    std::string line;
    std::getline(in, line);  // header
    std::vector<double> out;
    while (std::getline(in, line)) {
        if (line.empty() || line == "\r") continue;
        out.push_back(parse_double(line, path));
    }
    return out;
}

}  // namespace

void write_grid_csv(const GridChain& grid, const std::filesystem::path& dir, const std::string& stem) {
    std::filesystem::create_directories(dir);
    {
        auto out = open_out(dir / (stem + "_points.csv"));
        out << "point\n";
        for (double x : grid.points()) out << format_number(x) << '\n';
    }
    {
        auto out = open_out(dir / (stem + "_weights.csv"));
        out << "weight\n";
        for (double w : grid.weights()) out << format_number(w) << '\n';
    }
    auto out = open_out(dir / (stem + "_matrix.csv"));
    const auto& k = grid.matrix();
    for (Eigen::Index i = 0; i < k.rows(); ++i) {
        for (Eigen::Index j = 0; j < k.cols(); ++j) {
            if (j) out << ',';
            out << format_number(k(i, j));
        }
        out << '\n';
    }
}

GridChain read_grid_csv(const std::filesystem::path& dir, const std::string& stem) {
    auto points = read_column(dir / (stem + "_points.csv"));
    auto weights = read_column(dir / (stem + "_weights.csv"));
    const auto n = static_cast<Eigen::Index>(weights.size());
    const auto path = dir / (stem + "_matrix.csv");
    auto in = open_in(path);
    Eigen::MatrixXd k(n, n);
    std::string line;
    Eigen::Index row = 0;
    while (std::getline(in, line)) {
        if (line.empty() || line == "\r") continue;
        if (row >= n) throw InvalidArgument(path.string() + ": too many rows");
        std::stringstream ss(line);
        std::string field;
        Eigen::Index col = 0;
        while (std::getline(ss, field, ',')) {
            if (col >= n) throw InvalidArgument(path.string() + ": too many columns");
            k(row, col++) = parse_double(field, path);
        }
        if (col != n) throw InvalidArgument(path.string() + ": short row");
        ++row;
    }
    if (row != n) throw InvalidArgument(path.string() + ": expected " + std::to_string(n) + " rows");
    return GridChain::make(std::move(points), std::move(weights), std::move(k));
}

}  // namespace certify
