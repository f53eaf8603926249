#include "ntmlab/csv.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

namespace ntmlab {

const char* kRecordsCsvHeader = "iteration,loss_sum,loss_per_item,loss_per_bit,outlier,grad_norm";

namespace {

// %.17g round-trips doubles exactly through text.
std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

} // namespace

void write_csv_header(std::ostream& os) { os << kRecordsCsvHeader << "\n"; }

void write_csv_record(std::ostream& os, const TrainRecord& rec) {
    os << rec.iteration << "," << fmt(rec.loss_sum) << "," << fmt(rec.loss_per_item) << ","
       << fmt(rec.loss_per_bit) << "," << (rec.outlier ? 1 : 0) << "," << fmt(rec.grad_norm)
       << "\n";
}

void write_records_csv(const std::string& path, const std::vector<TrainRecord>& records) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open " + path + " for writing");
    write_csv_header(os);
    for (const TrainRecord& r : records) write_csv_record(os, r);
}

std::vector<TrainRecord> read_records_csv(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open " + path);
    std::string line;
    if (!std::getline(is, line) || line != kRecordsCsvHeader) {
        throw std::runtime_error(path + ": unexpected CSV header");
    }
    std::vector<TrainRecord> out;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string field;
        TrainRecord r;
        std::getline(ls, field, ',');
        r.iteration = std::stol(field);
        std::getline(ls, field, ',');
        r.loss_sum = std::stod(field);
        std::getline(ls, field, ',');
        r.loss_per_item = std::stod(field);
        std::getline(ls, field, ',');
        r.loss_per_bit = std::stod(field);
        std::getline(ls, field, ',');
        r.outlier = field == "1";
        std::getline(ls, field, ',');
        r.grad_norm = std::stod(field);
        out.push_back(r);
    }
    return out;
}

void write_summary(const std::string& path, const RunSummary& s) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open " + path + " for writing");
    os << "convergence_iteration " << s.convergence_iteration << "\n";
    os << "outlier_count " << s.outlier_count << "\n";
    os << "final_loss_per_bit " << fmt(s.final_loss_per_bit) << "\n";
    os << "seed " << s.seed << "\n";
    os << "config_hash " << s.config_hash << "\n";
}

std::vector<ReducedRow> reduce_series(const std::vector<std::vector<TrainRecord>>& series,
                                      const std::string& column) {
    auto pick = [&column](const TrainRecord& r) -> double {
        if (column == "loss_sum") return r.loss_sum;
        if (column == "loss_per_item") return r.loss_per_item;
        if (column == "loss_per_bit") return r.loss_per_bit;
        if (column == "grad_norm") return r.grad_norm;
        throw std::runtime_error("unknown column '" + column + "'");
    };
    std::map<long, std::vector<double>> by_iter;
    for (const auto& s : series) {
        for (const TrainRecord& r : s) by_iter[r.iteration].push_back(pick(r));
    }
    std::vector<ReducedRow> out;
    for (auto& [iter, vals] : by_iter) {
        std::sort(vals.begin(), vals.end());
        ReducedRow row;
        row.iteration = iter;
        row.median = vals[vals.size() / 2];
        row.min = vals.front();
        row.max = vals.back();
        out.push_back(row);
    }
    return out;
}

} // namespace ntmlab
