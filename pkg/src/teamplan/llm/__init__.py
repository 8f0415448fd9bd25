from .generator import (
    EmptyResponse,
    Generator,
    GeneratorConfig,
    GeneratorError,
    GeneratorUnavailable,
    HttpChatGenerator,
    MockGenerator,
    load_config,
    make_generator,
    render_messages,
)
from .loop import (
    FailureReport,
    LoopConfig,
    LoopSuccess,
    RoundRecord,
    debug_check,
    refine_loop,
    verify,
)
from .request import Diagnostics, GeneratorRequest, Message
