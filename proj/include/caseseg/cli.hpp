#pragma once

// `caseseg` command-line front end: clean -> detect -> eval, plus synth.

#include "caseseg/core.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace caseseg::cli {

enum ExitCode : int {
    exit_ok = 0,
    exit_input_error = 2,
    exit_parameter_error = 3,
};

// args[0] is the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int main(int argc, char** argv);

// Inserts "--key=value" tokens from a flat JSON config object right after the
// subcommand, skipping keys the command line already sets. The config path
// comes from --config, else from `env_path` (CASESEG_CONFIG). Keys listed in
// `foreign_keys` belong to other subcommands and are dropped.
std::vector<std::string> expand_config(const std::vector<std::string>& args,
                                       const char* env_path,
                                       const std::vector<std::string>& foreign_keys);

// ---------------------------------------------------------------------------
// Output formats

// id,start,end,start_timestamp,end_timestamp,mean_at_detection,partial
void write_patterns_csv(std::ostream& out, const TimeSeries& series,
                        const std::vector<Pattern>& patterns);
std::vector<Pattern> read_patterns_csv(std::istream& in);

// case_id,timestamp,value; one row per sample that carries a case id.
void write_event_log_csv(std::ostream& out, const TimeSeries& series,
                         const CaseAssignment& assignment);

// Series polyline with the detected patterns shaded behind it.
std::string series_plot_svg(const TimeSeries& series, const std::vector<Pattern>& patterns);

std::string report_json(const EvalReport& report);

// 0.9768 -> "97.7%"
std::string format_percent(double ratio);

}  // namespace caseseg::cli
