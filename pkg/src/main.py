import sys
import logging
from typing import List, Optional

from .cli.commands import run_command
from .cli.parser import build_parser
from .utils.error_handler import ErrorHandler


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)

    # Configure logging; records go to stderr so stdout stays machine-readable
    logging.basicConfig(
        level=getattr(logging, args.log_level),
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        stream=sys.stderr
    )

    try:
        run_command(args, stream=sys.stdout)
        return 0
    except Exception as e:
        line = ErrorHandler().handle_error(e)
        print(line, file=sys.stderr)
        return 1


if __name__ == '__main__':
    sys.exit(main())
