#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "ntmlab/trainer.hpp"

namespace ntmlab {

extern const char* kRecordsCsvHeader; // iteration,loss_sum,loss_per_item,loss_per_bit,outlier,grad_norm

void write_csv_header(std::ostream& os);
void write_csv_record(std::ostream& os, const TrainRecord& rec);
void write_records_csv(const std::string& path, const std::vector<TrainRecord>& records);
std::vector<TrainRecord> read_records_csv(const std::string& path);

void write_summary(const std::string& path, const RunSummary& summary);

// Per-iteration median/min/max of one column across several record series.
struct ReducedRow {
    long iteration = 0;
    double median = 0.0;
    double min = 0.0;
    double max = 0.0;
};
std::vector<ReducedRow> reduce_series(const std::vector<std::vector<TrainRecord>>& series,
                                      const std::string& column);

} // namespace ntmlab
