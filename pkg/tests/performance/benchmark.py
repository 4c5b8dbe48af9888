import time
import json
import psutil
import numpy as np
from typing import Dict, List
from pathlib import Path
from datetime import datetime

from code_catalog import builtin, stack2d, stack3d
from phase_algebra import HierarchyOperator, PhaseRing, group_commutator, multiply, square
from synthesis import synthesize_diagonal
from wall_search import classify

CODES = {
    'sc2d': lambda: builtin('sc2d'),
    'stack2d-n2': lambda: stack2d(2),
    'stack3d-n3': lambda: stack3d(3),
    'colour3d': lambda: builtin('colour3d'),
    'levinwen_odd': lambda: builtin('levinwen_odd'),
}

class Benchmark:
    def __init__(self, output_dir: str = "benchmark_results"):
        self.output_dir = Path(output_dir)
        self.output_dir.mkdir(parents=True, exist_ok=True)

        # Results storage
        self.results: Dict[str, List[float]] = {
            'memory_usage': [],
            'cpu_usage': []
        }

    def benchmark_classification(self, repeats: int = 3):
        """Benchmark end-to-end classification of the catalog codes"""
        print("\nBenchmarking classification...")
        for name, factory in CODES.items():
            spec = factory().spec
            times = []
            for _ in range(repeats):
                start_time = time.perf_counter()
                classify(spec)
                times.append(time.perf_counter() - start_time)
                self._record_system_metrics()
            self.results[f'classify_{name}'] = times
            print(f"{name}: mean {np.mean(times):.3f} s, max {np.max(times):.3f} s")

    def benchmark_algebra(self, num_operations: int = 2000):
        """Benchmark products, squares and commutators of three-qubit gates"""
        print("\nBenchmarking operator algebra...")
        ring = PhaseRing(2, 3)
        a = multiply(HierarchyOperator.controlled_z(ring, [0, 1, 2]), HierarchyOperator.pauli_x(ring, 0, n=3))
        b = multiply(HierarchyOperator.r_gate(ring, 1, 3, n=3), HierarchyOperator.cnot(ring, 1, 2, n=3))
        times = []
        for i in range(num_operations):
            start_time = time.perf_counter()
            square(multiply(a, b))
            group_commutator(a, b)
            times.append(time.perf_counter() - start_time)
            if i % 100 == 0:
                self._record_system_metrics()
        self.results['algebra_time'] = times
        print(f"Operations per second: {1.0 / np.mean(times):.1f}")

    def benchmark_synthesis(self, max_qubits: int = 8):
        """Benchmark diagonal synthesis of multi-controlled Z gates"""
        print("\nBenchmarking diagonal synthesis...")
        ring = PhaseRing(2, 1)
        for n in range(3, max_qubits + 1):
            appended = {0: HierarchyOperator.controlled_z(ring, list(range(1, n)), n=n)}
            start_time = time.perf_counter()
            synthesize_diagonal(appended, n, ring)
            self.results[f'synthesis_{n}q'] = [time.perf_counter() - start_time]
            self._record_system_metrics()
            print(f"{n} qubits: {self.results[f'synthesis_{n}q'][0]:.3f} s")

    def _record_system_metrics(self):
        """Record system resource usage"""
        self.results['cpu_usage'].append(psutil.cpu_percent())
        self.results['memory_usage'].append(psutil.Process().memory_info().rss / 1024 / 1024)  # MB

    def run_all_benchmarks(self):
        """Run all benchmarks"""
        self.benchmark_algebra()
        self.benchmark_synthesis()
        self.benchmark_classification()
        self.save_results()

    def save_results(self):
        """Save benchmark results"""
        timestamp = datetime.now().strftime("%Y%m%d_%H%M%S")
        results_file = self.output_dir / f"benchmark_results_{timestamp}.json"

        stats = {
            key: {
                'mean': float(np.mean(values)),
                'p95': float(np.percentile(values, 95)),
                'max': float(np.max(values))
            }
            for key, values in self.results.items() if values
        }

        with open(results_file, 'w') as f:
            json.dump({
                'results': {key: list(map(float, values)) for key, values in self.results.items()},
                'statistics': stats
            }, f, indent=2)

        print(f"\nResults saved to: {results_file}")

if __name__ == "__main__":
    Benchmark().run_all_benchmarks()
