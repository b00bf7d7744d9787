import pytest

from src.core.errors import BadInput, SpecSyntaxError
from src.db.key_store import (
    KeyStore,
    format_ciphertext,
    format_key,
    parse_ciphertext,
    parse_key_text,
)
from src.services.crypto import Ciphertext, bg_decrypt, bg_encrypt, blum_keygen


def test_key_text_format(blum21):
    assert format_key(blum21) == "n 21\np 3\nq 7\n"
    assert format_key(blum21, public=True) == "n 21\n"
    assert parse_key_text("# clave\nn 21  # módulo\np 3\nq 7\n") == {"n": 21, "p": 3, "q": 7}


@pytest.mark.parametrize("text", ["", "p 3\n", "n 21\nn 21\n", "n 0x15\n", "m 3\n", "n 21 22\n"])
def test_bad_key_text(text):
    with pytest.raises(SpecSyntaxError):
        parse_key_text(text)


def test_save_and_load(tmp_path, blum21):
    store = KeyStore(str(tmp_path / "keys"))
    private = store.save("toy", blum21)
    assert private.name == "toy.key"
    assert store.load_private(private) == blum21
    assert store.load_modulus(tmp_path / "keys" / "toy.pub") == 21


def test_public_file_has_no_private_key(tmp_path, blum21):
    store = KeyStore(str(tmp_path))
    store.save("toy", blum21)
    with pytest.raises(BadInput):
        store.load_private(tmp_path / "toy.pub")


def test_invalid_private_key(tmp_path):
    path = tmp_path / "bad.key"
    path.write_text("n 15\np 3\nq 5\n", encoding="utf-8")
    with pytest.raises(BadInput):
        KeyStore(str(tmp_path)).load_private(path)
    with pytest.raises(BadInput):
        KeyStore.read_file(tmp_path / "missing.key")


def test_ciphertext_file_round_trip(tmp_path, rng):
    key = blum_keygen(16, rng)
    ct = bg_encrypt("110010", key.n, rng)
    path = tmp_path / "msg.ct"
    KeyStore.save_ciphertext(path, ct)
    loaded = KeyStore.load_ciphertext(path)
    assert loaded == ct
    assert bg_decrypt(loaded, key) == (1, 1, 0, 0, 1, 0)


def test_ciphertext_text():
    ct = Ciphertext(21, (1, 0, 1, 0, 1), 16, (1, 1))
    assert format_ciphertext(ct) == "n 21\nx 10101\ns 16\nc 11\n"
    with pytest.raises(SpecSyntaxError):
        parse_ciphertext("n 21\nx 10101\ns 16\n")
    with pytest.raises(SpecSyntaxError):
        parse_ciphertext("n 21\nx 10201\ns 16\nc 11\n")
