"""Location homophily on mutual-friend graphs via majority-vote location estimation."""

__version__ = "0.1.0"

from .attributes import (AttributeTable, BoxStats, CorrelationMatrix, attribute_values, box_stats,
                         correlation_matrix, follow_ratio, load_attributes, spearman)
from .errors import GenerationError, HomophilyError, NotFoundError, ParseError, ValidationError
from .estimator import EvalResult, evaluate, infer_one, load_labels, predict
from .graph import GraphStats, SocialGraph, graph_stats, load_graph, neighbors, write_edges
from .significance import ProportionSample, SignificanceResult, compare_accuracy, upper_quantile
from .sweep import (FilterSpec, SweepResult, apply_filter, format_table, run_experiment, select_best, sweep,
                    threshold_grid)
from .synth import SynthConfig, SynthDataset, emit, generate
