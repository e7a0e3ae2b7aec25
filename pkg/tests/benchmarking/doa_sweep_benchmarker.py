import csv
import time
import traceback

from misspec_bounds.config_loader import ConfigLoader
from misspec_bounds.scenario_runner import ScenarioRunner
from misspec_bounds.table_to_csv import emit_csv


def benchmark_scenarios(scenarios, overrides=()):
    """
    Runs each scenario with its shipped defaults and records the outcome and runtime.
    """
    loader = ConfigLoader()
    loader.initiate()
    runner = ScenarioRunner()
    runner.initiate()

    successful_results = []
    error_results = []
    for scenario in scenarios:
        start = time.time()
        try:
            print(f"Running scenario: {scenario}")
            config = loader.run(scenario, overrides=overrides)
            result = runner.run(config)
            successful_results.append({
                'scenario': scenario,
                'result': result,
                'runtime': time.time() - start,
            })
        except Exception as e:
            error_results.append({
                'scenario': scenario,
                'error': f"Error: {str(e)}\nTraceback: {traceback.format_exc()}",
            })
    return successful_results, error_results


def write_check_report(successful_results, path='check_report.tsv'):
    """
    Writes every check outcome to a TSV file.
    """
    with open(path, 'w', newline='') as f:
        writer = csv.writer(f, delimiter='\t')
        writer.writerow(['scenario', 'check', 'passed', 'detail'])
        for entry in successful_results:
            for check in entry['result'].checks:
                writer.writerow([entry['scenario'], check.name, check.passed, check.detail])


def generate_summary(successful_results, error_results, path='summary_report.txt'):
    """
    Summary of runtimes, failed checks and exceptions per scenario.
    """
    with open(path, 'w') as f:
        f.write(f"Scenarios run: {len(successful_results) + len(error_results)}\n")
        for entry in successful_results:
            result = entry['result']
            failures = result.failures()
            f.write(f"\n{entry['scenario']}: {len(result.checks) - len(failures)}/{len(result.checks)} checks passed"
                    f" in {entry['runtime']:.1f} seconds\n")
            for failure in failures:
                f.write(f"- FAILED {failure.name}: {failure.detail}\n")
        if error_results:
            f.write("\nExceptions:\n")
            for error in error_results:
                f.write(f"- {error['scenario']}: {error['error'].splitlines()[0]}\n")
        else:
            f.write("\nNo exceptions encountered.\n")


def run_benchmark(out_dir='results'):
    """
    Runs the DOA sweep end to end, writes its tables and the reports.
    """
    successful_results, error_results = benchmark_scenarios(['doa_sweep'])
    for entry in successful_results:
        for name, table in entry['result'].tables.items():
            emit_csv(table, f"{out_dir}/{name}.csv")
    write_check_report(successful_results)
    generate_summary(successful_results, error_results)


if __name__ == "__main__":
    run_benchmark()
