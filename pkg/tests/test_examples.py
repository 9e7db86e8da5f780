from unittest.mock import patch

import pytest


def test_droplet_example() -> None:
    from example.droplet_example import main

    with patch("builtins.print"):
        main()


def test_gradient_example() -> None:
    from example.gradient_example import main

    with patch("builtins.print"):
        main()


@pytest.mark.asyncio
async def test_batch_example() -> None:
    from example.batch_example import main

    with patch("builtins.print"):
        await main()
