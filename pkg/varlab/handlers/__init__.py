from .command_handlers import command_handlers
from .experiment_handlers import experiment_handlers

# Combine all subcommands into a single list
all_handlers = command_handlers + experiment_handlers
