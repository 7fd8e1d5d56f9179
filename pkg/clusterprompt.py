import json
import logging
import os

from prompt_toolkit import PromptSession
from prompt_toolkit import print_formatted_text
from prompt_toolkit.completion import Completer, NestedCompleter, PathCompleter
from prompt_toolkit.document import Document
from prompt_toolkit.history import FileHistory
from prompt_toolkit.key_binding import KeyBindings
from prompt_toolkit.styles import Style

import clusterlab
import clusterlab_config as cc
import paperlab as pl
from annulus import AnnulusError, MarkedAnnulus, Triangulation, TriangulationSeed
from engine import EngineError, Seed, exchange_graph, initial_seed
from laurent import LaurentError
from quiver import LimitExceeded, Quiver, QuiverError, classify_tilde_A

HISTORY_FILE = "command_history.txt"

# (command, description, handler, takes an argument, argument is a file)
command_handlers = [
    ("exit", "exit the prompt", "stop", False, False),
    ("help", "show this help", "show_help", False, False),
    ("clear", "clear the screen of the terminal", "clear_screen", False, False),
    ("load quiver", "load a quiver JSON file and its initial seed", "load_quiver", True, True),
    ("load seed", "load a seed JSON file", "load_seed", True, True),
    ("load triangulation", "load a triangulation JSON file", "load_triangulation", True, True),
    ("tildeA", "start from the initial triangulation of C(p,q), argument 'p q'", "start_annulus", True, False),
    ("show", "show the current seed and triangulation", "show", False, False),
    ("mutate", "mutate the current seed in a direction, from 0", "mutate", True, False),
    ("flip", "flip an arc of the current triangulation with its seed", "flip", True, False),
    ("graph", "size of the exchange graph of the current seed to a depth", "graph", True, False),
    ("classify", "classify the current quiver", "classify", False, False),
    ("verify", "run a verification report by name", "verify", True, False),
]

style = Style.from_dict({
    # user input
    "": "#000000",
    # prompt
    "default": "bold blue",
})


class ClusterCompleter(Completer):

    def __init__(self):
        self.path_completer = PathCompleter(expanduser=True)
        self.command_completer = NestedCompleter.from_nested_dict(self.generate_completer(command_handlers))
        self.file_commands = [name for name, _, _, _, is_file in command_handlers if is_file]

    def generate_completer(self, handlers):
        completer = {}
        for command, _, _, _, _ in handlers:
            parts = command.split(" ")
            if len(parts) > 1:
                completer.setdefault(parts[0], {})[parts[1]] = None
            elif command == "verify":
                completer[command] = {name: None for name in list(pl.REPORTS) + ["all"]}
            else:
                completer[command] = None
        return completer

    def get_completions(self, document, complete_event):
        text = document.text
        for command in self.file_commands:
            if text.startswith(command + " "):
                sub_document = Document(text[len(command) + 1:].lstrip())
                yield from self.path_completer.get_completions(sub_document, complete_event)
                return
        yield from self.command_completer.get_completions(document, complete_event)


class ClusterPrompt:
    """interactive shell holding a current seed and, optionally, its triangulation"""

    def __init__(self, config: cc.ClusterLabConfig, rng_seed: int = 0, output=print_formatted_text):
        self.config = config
        self.rng_seed = rng_seed
        self.output = output
        self.exit_now = False
        self.seed = None
        self.state = None

    def run(self):
        session = PromptSession(history=FileHistory(HISTORY_FILE))
        bindings = KeyBindings()

        @bindings.add("c-c")
        def _(event):
            event.app.exit()
            self.stop()

        self.output("")
        self.output("--------------------------------------")
        self.output(f"    Cluster Lab {pl.get_lab_version()} - prompt    ")
        self.output("--------------------------------------")
        self.output("")
        while not self.exit_now:
            message = [("class:default", "ClusterLab % ")]
            command = session.prompt(message, key_bindings=bindings, completer=ClusterCompleter(), style=style)
            if command is not None:
                self.execute(command)

    def execute(self, command: str) -> None:
        command = command.strip()
        if not command:
            return
        # longest names first so "load seed" never matches a shorter prefix
        for name, _, handler_name, has_argument, _ in sorted(command_handlers, key=lambda h: -len(h[0])):
            if command == name or command.startswith(name + " "):
                argument = command[len(name):].strip()
                handler = getattr(self, handler_name)
                if has_argument and not argument:
                    self.output(f"Invalid usage. Usage: {name} [argument]")
                    return
                try:
                    handler(argument) if has_argument else handler()
                except (LaurentError, QuiverError, EngineError, AnnulusError, LimitExceeded,
                        pl.PaperlabError, OSError, ValueError) as exception:
                    logging.info("%s failed: %s", name, exception)
                    self.output(f"error: {exception}")
                return
        self.output(f"Unknown command: {command}")

    def stop(self):
        self.exit_now = True

    def show_help(self):
        self.output("")
        for name, description, _, _, _ in command_handlers:
            self.output(f"{name.ljust(20)} | {description}")
        self.output("")

    def clear_screen(self):
        os.system("clear")

    def _require_seed(self) -> Seed:
        if self.seed is None:
            raise ValueError("no seed loaded, use 'load' or 'tildeA' first")
        return self.seed

    def load_quiver(self, argument):
        with open(argument, "r") as file:
            self.seed = initial_seed(Quiver.from_json(json.load(file)))
        self.state = None
        self.output(f"Loaded quiver on {self.seed.n} points")

    def load_seed(self, argument):
        with open(argument, "r") as file:
            self.seed = Seed.from_json(json.load(file))
        self.state = None
        self.output(f"Loaded seed of rank {self.seed.n}")

    def load_triangulation(self, argument):
        with open(argument, "r") as file:
            triangulation = Triangulation.from_json(json.load(file))
        self.state = TriangulationSeed(triangulation, initial_seed(triangulation.quiver()))
        self.seed = self.state.seed
        self.output(f"Loaded triangulation of {triangulation.annulus}")

    def start_annulus(self, argument):
        p, q = (int(v) for v in argument.split())
        self.state = TriangulationSeed.initial(MarkedAnnulus(p, q))
        self.seed = self.state.seed
        self.output(f"Initial triangulation of {self.state.triangulation.annulus}")
        self.show()

    def show(self):
        seed = self._require_seed()
        for i, variable in enumerate(seed.cluster):
            arc = f"  [{self.state.triangulation.arcs[i]}]" if self.state is not None else ""
            self.output(f"{i}{arc}: {variable}")
        self.output(f"arrows: {seed.quiver.arrows()}")

    def mutate(self, argument):
        k = int(argument)
        seed = self._require_seed()
        plus, minus = seed.exchange_polynomials(k)
        self.seed = seed.mutate(k)
        # a bare mutation leaves the triangulation behind
        self.state = None
        self.output(f"{seed.cluster[k]} * {self.seed.cluster[k]} = {plus} + {minus}")

    def flip(self, argument):
        if self.state is None:
            raise ValueError("no triangulation, use 'tildeA' or 'load triangulation' first")
        i = int(argument)
        relation = self.state.relation(i)
        self.state = self.state.flip(i)
        self.seed = self.state.seed
        self.output(f"{relation.flip.old_arc} -> {relation.flip.new_arc}")
        self.output(f"{relation.variable} * {self.seed.cluster[i]} = {relation.plus} + {relation.minus}")

    def graph(self, argument):
        graph = exchange_graph(self._require_seed(), int(argument), self.config.node_limit)
        self.output(f"{len(graph)} seeds, {len(graph.variables())} cluster variables to depth {graph.depth}")

    def classify(self):
        self.output(json.dumps(classify_tilde_A(self._require_seed().quiver, self.config.node_limit).to_json()))

    def verify(self, argument):
        reports = pl.run_report(argument, node_limit=self.config.node_limit, seed=self.rng_seed)
        for report in reports:
            self.output(report.summary())


def main() -> None:
    config = clusterlab.load_config()
    clusterlab.setup_logging(config, default_file="log.txt")
    ClusterPrompt(config, config.rng_seed).run()


if __name__ == "__main__":
    main()
