"""Strategy-driven port-graph rewriting for propagation-model analysis."""

from .errors import (ApplicationError, BudgetExceeded, ConfigError, EngineError,
                     ExpressionError, GraphError, ParseError, RuleError,
                     StrategyError, TraceError)
from .graph import (DEFAULT_EPS, Edge, GraphBuilder, GraphDelta, IdAllocator,
                    LocatedGraph, Node, Port, PortGraph, Record, Ref,
                    diff_graphs, kind_of, set_banned, set_position, validate)
from .graphio import dump_bytes, dumps, graph_from_json, graph_to_json, loads
from .expressions import evaluate, format_expression, parse_expression
from .rules import (PropertyPredicate, RewriteRule, Var, dump_rules, load_rules,
                    rule_from_json, rule_to_json)
from .rewrite import Match, RewriteResult, apply_rule, find_matches
from .strategy import (Budget, StrategyOutcome, StrategyProgram, evaluate_filter,
                       format_strategy, parse_filter, parse_strategy, run_rounds,
                       run_strategy)
from .models import (InfluenceError, ModelConfig, add_influence, build_ic_rules,
                     build_lt_rules, builtin_rules, builtin_strategy_text,
                     joint_influence, load_model_config, remove_influence,
                     replace_influence, resolve_seed, run_simulation,
                     setup_simulation)
from .trace import DerivationTree, MetricSeries
from .netgen import GeneratorConfig, generate, import_edge_list

__version__ = "0.1.0"
