#include "bts/csv.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "bts/config.hpp"

namespace bts {

namespace {

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream in(line);
    while (std::getline(in, item, sep)) out.push_back(item);
    if (!line.empty() && line.back() == sep) out.emplace_back();
    return out;
}

[[noreturn]] void fail(const std::string& path, int line_no, const std::string& what) {
    throw DataError(path + ":" + std::to_string(line_no) + ": " + what);
}

double parse_double(const std::string& path, int line_no, const std::string& cell) {
    double v = 0.0;
    const char* begin = cell.data();
    const char* end = begin + cell.size();
    const auto res = std::from_chars(begin, end, v);
    if (res.ec != std::errc() || res.ptr != end) {
        fail(path, line_no, "not a number: '" + cell + "'");
    }
    return v;
}

std::int64_t parse_int(const std::string& path, int line_no, const std::string& cell) {
    std::int64_t v = 0;
    const char* begin = cell.data();
    const char* end = begin + cell.size();
    const auto res = std::from_chars(begin, end, v);
    if (res.ec != std::errc() || res.ptr != end) {
        fail(path, line_no, "not an integer: '" + cell + "'");
    }
    return v;
}

std::ifstream open_in(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open: " + path);
    return in;
}

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write: " + path);
    return out;
}

std::string chomp(std::string line) {
    while (!line.empty() && (line.back() == '\r' || line.back() == '\n')) line.pop_back();
    return line;
}

}  // namespace

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

SeriesData read_series_csv(const std::string& path) {
    auto in = open_in(path);
    std::string line;
    int line_no = 0;
    if (!std::getline(in, line)) throw DataError(path + ": empty file");
    ++line_no;
    const auto header = split(chomp(line), ',');
    if (header.size() < 2 || header[0] != "t" || header[1] != "x") {
        fail(path, line_no, "expected header starting with t,x");
    }
    const bool has_b = header.size() >= 3 && header[2] == "b_true";

    SeriesData data;
    data.has_b_true = has_b;
    while (std::getline(in, line)) {
        ++line_no;
        line = chomp(line);
        if (line.empty()) continue;
        const auto cells = split(line, ',');
        if (cells.size() < (has_b ? 3u : 2u)) fail(path, line_no, "missing column");
        const std::int64_t t = parse_int(path, line_no, cells[0]);
        if (!data.t.empty() && t <= data.t.back()) {
            fail(path, line_no, "time index must be strictly increasing");
        }
        data.t.push_back(t);
        data.x.push_back(parse_double(path, line_no, cells[1]));
        if (has_b) data.b_true.push_back(parse_double(path, line_no, cells[2]));
    }
    if (data.x.empty()) throw DataError(path + ": no data rows");
    return data;
}

void write_series_csv(const std::string& path, const SeriesData& data) {
    auto out = open_out(path);
    out << (data.has_b_true ? "t,x,b_true\n" : "t,x\n");
    for (std::size_t i = 0; i < data.size(); ++i) {
        out << data.t[i] << ',' << format_double(data.x[i]);
        if (data.has_b_true) out << ',' << format_double(data.b_true[i]);
        out << '\n';
    }
}

std::vector<TrajectoryRecord> read_trajectory_csv(const std::string& path) {
    auto in = open_in(path);
    std::string line;
    int line_no = 0;
    if (!std::getline(in, line)) throw DataError(path + ": empty file");
    ++line_no;
    const auto header = split(chomp(line), ',');
    // t,lambda_1..lambda_p,sigma2,nu,b_hat,b_tilde,loss
    if (header.size() < 7 || header[0] != "t" || header[1] != "lambda_1") {
        fail(path, line_no, "expected trajectory header t,lambda_1,...,sigma2,nu,b_hat,b_tilde,loss");
    }
    const int p = static_cast<int>(header.size()) - 6;

    std::vector<TrajectoryRecord> records;
    while (std::getline(in, line)) {
        ++line_no;
        line = chomp(line);
        if (line.empty()) continue;
        const auto cells = split(line, ',');
        if (cells.size() != header.size()) fail(path, line_no, "missing column");
        TrajectoryRecord rec;
        rec.t = parse_int(path, line_no, cells[0]);
        rec.lambdas.resize(p);
        for (int k = 0; k < p; ++k) rec.lambdas[k] = parse_double(path, line_no, cells[1 + k]);
        rec.sigma2 = parse_double(path, line_no, cells[1 + p]);
        rec.nu = parse_double(path, line_no, cells[2 + p]);
        rec.b_hat = parse_double(path, line_no, cells[3 + p]);
        rec.b_tilde = parse_double(path, line_no, cells[4 + p]);
        rec.loss = parse_double(path, line_no, cells[5 + p]);
        records.push_back(std::move(rec));
    }
    return records;
}

void write_trajectory_csv(const std::string& path, const std::vector<TrajectoryRecord>& records) {
    auto out = open_out(path);
    const int p = records.empty() ? 1 : static_cast<int>(records.front().lambdas.size());
    out << "t";
    for (int k = 1; k <= p; ++k) out << ",lambda_" << k;
    out << ",sigma2,nu,b_hat,b_tilde,loss\n";
    for (const auto& rec : records) {
        out << rec.t;
        for (double l : rec.lambdas) out << ',' << format_double(l);
        out << ',' << format_double(rec.sigma2) << ',' << format_double(rec.nu) << ','
            << format_double(rec.b_hat) << ',' << format_double(rec.b_tilde) << ','
            << format_double(rec.loss) << '\n';
    }
}

std::vector<ForecastRecord> read_forecast_csv(const std::string& path) {
    auto in = open_in(path);
    std::string line;
    int line_no = 0;
    if (!std::getline(in, line)) throw DataError(path + ": empty file");
    ++line_no;
    if (chomp(line) != "t,target,kind,mu,sigma2,nu,b_tilde,ref") {
        fail(path, line_no, "unexpected forecast header");
    }

    std::vector<ForecastRecord> records;
    while (std::getline(in, line)) {
        ++line_no;
        line = chomp(line);
        if (line.empty()) continue;
        const auto cells = split(line, ',');
        if (cells.size() != 8) fail(path, line_no, "missing column");
        ForecastRecord rec;
        rec.issue_time = parse_int(path, line_no, cells[0]);
        rec.target_time = parse_int(path, line_no, cells[1]);
        if (cells[2] == "gln") {
            rec.kind = ForecastRecord::Kind::gln;
            rec.gln.mu = parse_double(path, line_no, cells[3]);
            rec.gln.sigma2 = parse_double(path, line_no, cells[4]);
            rec.gln.nu = parse_double(path, line_no, cells[5]);
            rec.gln.b = parse_double(path, line_no, cells[6]);
        } else if (cells[2] == "ensemble") {
            rec.kind = ForecastRecord::Kind::ensemble;
            rec.ensemble_ref = cells[7];
            if (rec.ensemble_ref.empty()) fail(path, line_no, "ensemble row without reference");
        } else {
            fail(path, line_no, "unknown forecast kind: '" + cells[2] + "'");
        }
        records.push_back(std::move(rec));
    }
    return records;
}

void write_forecast_csv(const std::string& path, const std::vector<ForecastRecord>& records) {
    auto out = open_out(path);
    out << "t,target,kind,mu,sigma2,nu,b_tilde,ref\n";
    for (const auto& rec : records) {
        out << rec.issue_time << ',' << rec.target_time << ',';
        if (rec.kind == ForecastRecord::Kind::gln) {
            out << "gln," << format_double(rec.gln.mu) << ',' << format_double(rec.gln.sigma2)
                << ',' << format_double(rec.gln.nu) << ',' << format_double(rec.gln.b) << ",\n";
        } else {
            out << "ensemble,,,,," << rec.ensemble_ref << '\n';
        }
    }
}

}  // namespace bts
