"""Network function computation and functional index coding, with exact
verification over prime fields and the reductions between the two problems."""

__version__ = "0.1.0"

from .algebra import (  # noqa: E402
    Add,
    BlockLayout,
    Compose,
    Concat,
    Const,
    Exhaustive,
    FieldSpec,
    FuncExpr,
    Majority,
    MaxInt,
    Neg,
    Proj,
    Sampled,
    Select,
    SymbolVec,
    Table,
    compose,
    evaluate,
    func_equal,
    materialize,
    simplify,
)
from .errors import NetficError  # noqa: E402
from .examples import builtin, builtin_examples  # noqa: E402
from .fic import (  # noqa: E402
    Client,
    FicCode,
    FicProblem,
    build_confusion_graph,
    check_exclusive_law,
    min_length_bounds,
    verify_fic_code,
)
from .instances import InstanceFile, parse_instance, serialize_instance  # noqa: E402
from .netcomp import (  # noqa: E402
    Edge,
    NetCode,
    NetProblem,
    Sink,
    SourceEdge,
    ancestral_order,
    derive_global_kernels,
    validate_problem,
    verify_net_code,
)
from .reductions import (  # noqa: E402
    check_bijection,
    fic_code_to_nc_code,
    fic_code_to_nc_code_gadget,
    fic_to_nc,
    nc_code_to_fic_code,
    nc_code_to_fic_code_gadget,
    nc_to_fic,
)
from .report import VerifyReport  # noqa: E402
